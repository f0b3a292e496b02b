"""Command-line interface.

`rdmflux run <config>...` runs experiments from TOML configs or previous run
manifests, `rdmflux compare <manifestA> <manifestB>` evaluates the
chaotic-vs-regular ordering assertions between two runs, and
`rdmflux list-experiments` prints the registry. Exit codes: 0 on success
(recorded fit failures included), 2 for configuration problems, 3 for
capacity limits.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import CapacityError, ConfigError, RdmfluxError, ValidationError
from .experiments import (
    DESCRIPTIONS,
    OUT_ROOT_ENV,
    compare_runs,
    load_config,
    resolve_config,
    resolve_out_dir,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdmflux",
        description="Quantum-chaos experiments on reduced-density-matrix "
                    "fluctuations.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="run experiments from config files or run manifests")
    run_p.add_argument("configs", nargs="+", metavar="CONFIG",
                       help="TOML config or manifest.json of a previous run")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config's root seed")
    run_p.add_argument("--out-dir", default=None,
                       help="output directory (with several configs, each run "
                            "gets a subdirectory named after its config file); "
                            f"default root comes from ${OUT_ROOT_ENV}")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker threads for running several configs")

    cmp_p = sub.add_parser(
        "compare", help="compare two runs of the same experiment")
    cmp_p.add_argument("manifest_a", help="manifest of the putatively chaotic run")
    cmp_p.add_argument("manifest_b", help="manifest of the putatively regular run")

    sub.add_parser("list-experiments", help="print the experiment registry")
    return parser


def _fmt_scalar(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return "%.6g" % value


def _cmd_run(args) -> int:
    jobs = []
    claimed: dict[str, str] = {}
    for source in args.configs:
        raw = load_config(source)
        if args.seed is not None:
            raw["seed"] = args.seed
        cfg = resolve_config(raw)
        if args.out_dir is not None:
            out = Path(args.out_dir)
            if len(args.configs) > 1:
                out = out / Path(source).stem
        else:
            out = resolve_out_dir(cfg, None)
        key = str(out.resolve())
        if key in claimed:
            raise ConfigError(
                f"{source} and {claimed[key]} resolve to the same output "
                f"directory {out}; give each run its own")
        claimed[key] = source
        jobs.append((cfg, out))

    if args.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            futures = [pool.submit(run_experiment, cfg, out_dir=out)
                       for cfg, out in jobs]
            manifests = [f.result() for f in futures]
    else:
        manifests = [run_experiment(cfg, out_dir=out) for cfg, out in jobs]

    for manifest in manifests:
        line = (f"{manifest.experiment}: {len(manifest.outputs)} outputs in "
                f"{Path(manifest.path).parent}")
        if manifest.fit_failures:
            line += f" ({len(manifest.fit_failures)} fit failure(s) recorded)"
        print(line)
    return 0


def _cmd_compare(args) -> int:
    report = compare_runs(args.manifest_a, args.manifest_b)
    print(f"experiment: {report['experiment']}")
    print("values (A = first run, B = second):")
    for key, entry in report["values"].items():
        print(f"  {key}: A={_fmt_scalar(entry['a'])} B={_fmt_scalar(entry['b'])} "
              f"ratio={_fmt_scalar(entry['ratio'])}")
    if not report["assertions"]:
        print("assertions: none declared for this experiment")
        return 0
    print("assertions:")
    for a in report["assertions"]:
        print(f"  {a['diagnostic']} [{a['relation']}]: {a['verdict']} "
              f"({a['detail']})")
    return 0


def _cmd_list(_args) -> int:
    width = max(len(name) for name in DESCRIPTIONS)
    for name in sorted(DESCRIPTIONS):
        print(f"{name:<{width}}  {DESCRIPTIONS[name]}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "compare": _cmd_compare,
                "list-experiments": _cmd_list}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RdmfluxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Configuration-driven experiment runner.

Each experiment in the registry reproduces one chaotic-vs-regular pipeline at
desk scale from a structured TOML config: build the system, evolve a state,
run the selected diagnostics, and write CSV tables plus a JSON results
sidecar. Every run emits a manifest that echoes the fully resolved config
(auto fields replaced by the values actually used), the derived seeds, the
package versions, and a checksum per output file, so a rerun from the
manifest reproduces the CSVs byte for byte.

Fit failures inside diagnostics are recorded in the manifest instead of
aborting the run; configuration mistakes raise ConfigError with the dotted
key path that caused them.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
import platform
import time
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._kernels import backend as kernel_backend
from .classical import (
    coupled_harper_energy,
    coupled_harper_flow,
    lyapunov_largest,
    poincare_section,
    random_phase_points,
)
from .diagnostics import (
    IntervalHistogram,
    effective_support_width,
    energy_interval_distribution,
    level_spacings,
    matrix_autocorrelation,
    power_spectrum,
    series_autocorrelation,
    spectral_bandwidth,
    trace_rho_squared_spectral,
)
from .dynamics import (
    EvolutionPlan,
    anti_alias_dt,
    evolve_density_spectral,
    evolve_floquet,
    evolve_state_spectral,
    extract_series,
)
from .errors import ConfigError, DegenerateSeriesError, ValidationError
from .hamiltonians import (
    CoupledHarperParams,
    GoeParams,
    RotorParams,
    TorusParams,
    build_coupled_harper,
    build_floquet_coupled_rotors_continuous,
    build_goe,
    build_harper,
    build_rotor_momentum_array,
    coherent_state,
    hybrid_hamiltonian,
)
from .linalg import BipartiteDims, Spectrum, dft_unitary, eigh, random_pure_product

__all__ = [
    "DEFAULTS",
    "DESCRIPTIONS",
    "MANIFEST_FORMAT",
    "OUT_ROOT_ENV",
    "RunManifest",
    "compare_runs",
    "load_config",
    "load_manifest",
    "resolve_config",
    "resolve_out_dir",
    "run_experiment",
]

MANIFEST_FORMAT = "rdmflux-run/1"
OUT_ROOT_ENV = "RDMFLUX_OUT_ROOT"

DESCRIPTIONS = {
    "spin-proto": "GOE vs Harper prototype: A_H and S_L fluctuation correlations "
                  "on a 128-level system split 16 x 8",
    "rotors": "coupled kicked rotors: momentum-array element correlations and "
              "S_VN fluctuations of one rotor",
    "harper-pair": "coupled Harper subsystems: purity power spectrum, S_L "
                   "correlations, Poincare sections, Lyapunov exponents",
    "intervals": "spectral statistics: pooled level-spacing distribution and "
                 "transition-frequency support, GOE vs Harper vs Poisson",
    "hybrid": "operators mixing eigenvalues and eigenvectors across regimes: "
              "spectra, fluctuation power, bandwidth ordering",
    "spectral-check": "eigenbasis reconstruction of Tr rho_R^2 against direct "
                      "evolution on a 36-level system",
}

# Full schema per experiment: every key the config may set, with its default.
# Unknown keys are rejected; 0.0 marks fields resolved at run time.
DEFAULTS: dict[str, dict] = {
    "spin-proto": {
        "seed": 1,
        "output_dir": "",
        "system": {"model": "goe", "dim": 128, "dim_a": 16, "dim_b": 8,
                   "hbar": 0.592, "sigma": 0.0, "gamma1": 1.0, "gamma2": 1.0},
        "initial_state": {"kind": "random-product", "basis": "position",
                          "index1": 0, "index2": 0},
        # dt is pinned below the anti-alias bound of BOTH models at the
        # default parameters, so chaotic and regular runs share a sampling
        # rate and their correlation lengths compare in the same units
        "evolution": {"steps": 4096, "dt": 0.11, "keep": "A",
                      "check_interval": 64, "max_lag": 400,
                      "matrix_max_lag": 96},
        "diagnostics": {"names": ["a_h_autocorr", "s_l_series", "s_l_autocorr"]},
    },
    "rotors": {
        "seed": 1,
        "output_dir": "",
        "system": {"num_states": 16, "kick1": 10.0, "kick2": 10.0,
                   "kick_period": 1.0, "coupling": 2.0, "hbar": 0.35},
        "initial_state": {"kind": "basis", "basis": "momentum",
                          "index1": 0, "index2": 0},
        "evolution": {"steps": 4096, "keep": "A", "check_interval": 64,
                      "max_lag": 400, "matrix_max_lag": 100, "tail_lag": 50},
        "diagnostics": {"names": ["a_u_autocorr", "s_vn_series",
                                  "s_vn_autocorr"]},
    },
    "harper-pair": {
        "seed": 1,
        "output_dir": "",
        "system": {"num_states": 10, "gamma1": 2.0, "gamma2": 2.0,
                   "coupling": 10.0},
        "initial_state": {"kind": "random-product", "basis": "position",
                          "index1": 0, "index2": 0,
                          "q1": 0.0, "p1": 0.0, "q2": 0.0, "p2": 0.0},
        # dt sits at the anti-alias bound of the strongly coupled case, so
        # runs at different couplings stay mutually comparable
        "evolution": {"steps": 4096, "dt": 0.0206, "keep": "A",
                      "check_interval": 64, "max_lag": 400,
                      "matrix_max_lag": 64},
        "classical": {"orbit_count": 20, "orbit_seed": 7, "flow_dt": 0.01,
                      "flow_steps": 20000, "lyapunov_steps": 100000,
                      "poincare_orbits": 8, "check_energy": False},
        "diagnostics": {"names": ["a_h_autocorr", "s_l_series", "s_l_autocorr",
                                  "power_spectrum", "poincare", "lyapunov"]},
    },
    "intervals": {
        "seed": 1,
        "output_dir": "",
        "system": {"dim": 128, "sigma": 0.0, "gamma1": 1.0, "gamma2": 1.0,
                   "pool": 10},
        "stats": {"nnlsd_bins": 40, "omega_bins": 32768, "occupancy": 0.1},
        "diagnostics": {"names": ["nnlsd", "omega_support"]},
    },
    "hybrid": {
        "seed": 1,
        "output_dir": "",
        "system": {"dim": 128, "dim_a": 16, "dim_b": 8, "hbar": 0.592,
                   "sigma": 2.0, "gamma1": 1.0, "gamma2": 1.0},
        "initial_state": {"kind": "random-product"},
        "evolution": {"steps": 4096, "dt": 0.0, "keep": "A",
                      "check_interval": 64, "bandwidth_fraction": 0.9},
        "diagnostics": {"names": ["spectra", "power_spectrum", "bandwidth"]},
    },
    "spectral-check": {
        "seed": 1,
        "output_dir": "",
        "system": {"num_states": 6, "gamma1": 1.0, "gamma2": 1.0,
                   "coupling": 1.0},
        "initial_state": {"kind": "random-product"},
        "check": {"points": 100, "dt": 0.0},
        "diagnostics": {"names": ["trace_rho_sq"]},
    },
}

_DIAG_NAMES = {exp: tuple(d["diagnostics"]["names"]) for exp, d in DEFAULTS.items()}

# Ordering assertions evaluated by compare_runs; run A is the putatively
# chaotic one. "less"/"greater" compare A against B directly;
# ("ratio_greater", t) requires A/B > t.
ORDERING_ASSERTIONS: dict[str, list] = {
    "spin-proto": [("s_l_l_c", "less", None), ("a_h_l_c", "less", None)],
    "rotors": [("a_u_l_c", "less", None), ("s_vn_tail_max", "less", None)],
    "harper-pair": [("pr", "ratio_greater", 3.0), ("s_l_l_c", "less", None),
                    ("lyapunov_median", "greater", None)],
    "intervals": [],
    "hybrid": [],
    "spectral-check": [],
}


# ---------------------------------------------------------------------------
# configuration


def _coerce(path: str, default, value):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{path} must be a list of strings, got {value!r}")
        return list(value)
    raise ConfigError(f"{path} has unsupported schema type {type(default).__name__}")


def _merge_section(path: str, defaults: dict, raw: Mapping) -> dict:
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key '{path}{unknown[0]}'")
    out = {}
    for key, dval in defaults.items():
        if key not in raw:
            out[key] = copy.deepcopy(dval)
        elif isinstance(dval, dict):
            if not isinstance(raw[key], Mapping):
                raise ConfigError(f"{path}{key} must be a section")
            out[key] = _merge_section(f"{path}{key}.", dval, raw[key])
        else:
            out[key] = _coerce(f"{path}{key}", dval, raw[key])
    return out


def resolve_config(raw: Mapping) -> dict:
    """Validate a raw config mapping against the experiment's schema and fill
    in every default, so the result is fully explicit. Unknown keys raise
    ConfigError with their dotted path."""
    if not isinstance(raw, Mapping):
        raise ConfigError(f"config must be a mapping, got {type(raw).__name__}")
    experiment = raw.get("experiment")
    if experiment is None:
        raise ConfigError("missing required key 'experiment'")
    if experiment not in DEFAULTS:
        known = ", ".join(sorted(DEFAULTS))
        raise ConfigError(f"unknown experiment {experiment!r} (known: {known})")
    body = {k: v for k, v in raw.items() if k != "experiment"}
    cfg = _merge_section("", DEFAULTS[experiment], body)
    cfg["experiment"] = experiment
    for name in cfg["diagnostics"]["names"]:
        if name not in _DIAG_NAMES[experiment]:
            valid = ", ".join(_DIAG_NAMES[experiment])
            raise ConfigError(
                f"diagnostics.names: {name!r} is not a diagnostic of "
                f"{experiment} (valid: {valid})")
    return cfg


def load_config(source) -> dict:
    """Accept a config mapping, a TOML config path, or a manifest JSON path
    (rerun from the echoed config)."""
    if isinstance(source, Mapping):
        return dict(source)
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        with open(path, "rb") as fh:
            doc = json.load(fh)
        if not isinstance(doc, Mapping) or "config" not in doc:
            raise ConfigError(f"{path} is not a run manifest (no 'config' block)")
        return dict(doc["config"])
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# manifest and outputs


@dataclass(frozen=True)
class RunManifest:
    """Record of one completed run: the fully resolved config, derived seeds,
    software versions, kernel backend, wall time, scalar results, recorded
    fit failures, and a sha256 per output file."""

    experiment: str
    config: dict
    seeds: dict
    versions: dict
    kernel_backend: str
    wall_time_s: float
    outputs: dict
    results: dict
    fit_failures: list
    path: str

    def to_dict(self) -> dict:
        return {
            "format": MANIFEST_FORMAT,
            "experiment": self.experiment,
            "config": self.config,
            "seeds": self.seeds,
            "versions": self.versions,
            "kernel_backend": self.kernel_backend,
            "wall_time_s": self.wall_time_s,
            "outputs": self.outputs,
            "results": self.results,
            "fit_failures": self.fit_failures,
        }


def load_manifest(path) -> RunManifest:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"manifest not found: {path}")
    with open(path, "rb") as fh:
        doc = json.load(fh)
    if not isinstance(doc, Mapping) or doc.get("format") != MANIFEST_FORMAT:
        raise ValidationError(f"{path} is not a {MANIFEST_FORMAT} manifest")
    return RunManifest(
        experiment=doc["experiment"], config=dict(doc["config"]),
        seeds=dict(doc["seeds"]), versions=dict(doc["versions"]),
        kernel_backend=doc["kernel_backend"],
        wall_time_s=float(doc["wall_time_s"]), outputs=dict(doc["outputs"]),
        results=dict(doc["results"]), fit_failures=list(doc["fit_failures"]),
        path=str(path))


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _write_csv(path: Path, header, columns) -> None:
    columns = [np.asarray(c) for c in columns]
    rows = columns[0].shape[0]
    lines = [",".join(header)]
    for r in range(rows):
        lines.append(",".join(_fmt(col[r]) for col in columns))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _jsonify(value):
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def resolve_out_dir(cfg: dict, out_dir) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if cfg["output_dir"]:
        return Path(cfg["output_dir"])
    root = Path(os.environ.get(OUT_ROOT_ENV, "rdmflux-runs"))
    return root / f"{cfg['experiment']}-seed{cfg['seed']}"


def _derive_seeds(root: int) -> dict:
    """Per-purpose integer seeds derived from the root seed; the derivation
    is part of the reproducibility contract."""
    state = np.random.SeedSequence(root).generate_state(3)
    return {"root": int(root), "matrix": int(state[0]),
            "initial_state": int(state[1]), "reference": int(state[2])}


def _record_fit(label: str, res, results: dict, fit_failures: list) -> None:
    results[f"{label}_l_c"] = res.fit_l_c
    results[f"{label}_no_decay"] = bool(
        res.fit_error and "does not decay" in res.fit_error)
    if res.fit_error:
        fit_failures.append({"diagnostic": label, "message": res.fit_error})


def _autocorr_diag(label: str, series, max_lag: int, filename: str,
                   tables: dict, results: dict, fit_failures: list):
    """Series autocorrelation as a recorded diagnostic: a degenerate
    (constant) series is a recorded failure, not a crash, since regular
    parameter sets legitimately produce flat entropy."""
    try:
        res = series_autocorrelation(series, max_lag)
    except DegenerateSeriesError as exc:
        results[f"{label}_l_c"] = None
        results[f"{label}_no_decay"] = False
        fit_failures.append({"diagnostic": label, "message": str(exc)})
        return None
    tables[filename] = _autocorr_table(res)
    _record_fit(label, res, results, fit_failures)
    return res


def _autocorr_table(res):
    if res.dt is None:
        return ["lag", "autocorr"], [res.lags, res.values]
    return (["lag", "time", "autocorr"],
            [res.lags, res.lags * res.dt, res.values])


def _initial_state(sec: dict, dims: BipartiteDims, state_seed: int,
                   torus: TorusParams | None = None,
                   allowed=("random-product", "basis", "coherent")) -> np.ndarray:
    kind = sec["kind"]
    if kind not in allowed:
        raise ConfigError(
            f"initial_state.kind {kind!r} is not supported by this experiment "
            f"(allowed: {', '.join(allowed)})")
    if kind == "random-product":
        return random_pure_product(dims, state_seed)
    if kind == "basis":
        i1, i2 = sec["index1"], sec["index2"]
        if not (0 <= i1 < dims.dim_a and 0 <= i2 < dims.dim_b):
            raise ConfigError(
                f"initial_state index ({i1}, {i2}) outside bipartition "
                f"({dims.dim_a}, {dims.dim_b})")
        if sec["basis"] == "position":
            psi = np.zeros(dims.dim, dtype=complex)
            psi[i1 * dims.dim_b + i2] = 1.0
            return psi
        if sec["basis"] == "momentum":
            va = dft_unitary(dims.dim_a).conj().T[:, i1]
            vb = dft_unitary(dims.dim_b).conj().T[:, i2]
            return np.kron(va, vb)
        raise ConfigError(f"initial_state.basis {sec['basis']!r} is unknown")
    if torus is None:
        raise ConfigError("coherent initial states need torus subsystems")
    return np.kron(coherent_state(torus, sec["q1"], sec["p1"]),
                   coherent_state(torus, sec["q2"], sec["p2"]))


# ---------------------------------------------------------------------------
# pipelines


def _run_spin_proto(cfg: dict, seeds: dict):
    sys_c, evo = cfg["system"], cfg["evolution"]
    names = cfg["diagnostics"]["names"]
    if sys_c["dim_a"] * sys_c["dim_b"] != sys_c["dim"]:
        raise ConfigError(
            f"system.dim_a * system.dim_b must equal system.dim "
            f"({sys_c['dim_a']} * {sys_c['dim_b']} != {sys_c['dim']})")
    if sys_c["model"] == "goe":
        sigma = None if sys_c["sigma"] == 0.0 else sys_c["sigma"]
        params = GoeParams(dim=sys_c["dim"], seed=seeds["matrix"], sigma=sigma)
        H = build_goe(params)
        sys_c["sigma"] = params.sigma_value
    elif sys_c["model"] == "harper":
        side = math.sqrt(2.0 * math.pi * sys_c["dim"] * sys_c["hbar"])
        H = build_harper(TorusParams(
            num_states=sys_c["dim"], gamma1=sys_c["gamma1"],
            gamma2=sys_c["gamma2"], momentum_period=side, position_period=side))
    else:
        raise ConfigError(f"system.model must be 'goe' or 'harper', "
                          f"got {sys_c['model']!r}")

    tables, results, fit_failures = {}, {"model": sys_c["model"]}, []
    if "a_h_autocorr" in names:
        res = matrix_autocorrelation(H, evo["matrix_max_lag"])
        tables["a_h_autocorr.csv"] = _autocorr_table(res)
        _record_fit("a_h", res, results, fit_failures)

    if "s_l_series" in names or "s_l_autocorr" in names:
        spectrum = eigh(H)
        if evo["dt"] == 0.0:
            evo["dt"] = anti_alias_dt(spectrum, sys_c["hbar"])
        dims = BipartiteDims(sys_c["dim_a"], sys_c["dim_b"])
        psi0 = _initial_state(cfg["initial_state"], dims, seeds["initial_state"],
                              allowed=("random-product", "basis"))
        plan = EvolutionPlan(dims=dims, dt=evo["dt"], steps=evo["steps"],
                             hbar=sys_c["hbar"], keep=evo["keep"],
                             check_interval=evo["check_interval"])
        records = list(evolve_state_spectral(spectrum, psi0, plan))
        series = extract_series(records, "s_l")
        if "s_l_series" in names:
            steps = np.arange(len(series))
            tables["s_l_series.csv"] = (["step", "time", "s_l"],
                                        [steps, steps * series.dt, series.values])
        if "s_l_autocorr" in names:
            _autocorr_diag("s_l", series, evo["max_lag"], "s_l_autocorr.csv",
                           tables, results, fit_failures)
    return tables, results, fit_failures


def _run_rotors(cfg: dict, seeds: dict):
    sys_c, evo = cfg["system"], cfg["evolution"]
    names = cfg["diagnostics"]["names"]
    n = sys_c["num_states"]
    if sys_c["hbar"] == 0.0:
        sys_c["hbar"] = 2.0 * math.pi / n
    params = RotorParams(num_states=n, kick1=sys_c["kick1"],
                         kick2=sys_c["kick2"], kick_period=sys_c["kick_period"],
                         coupling=sys_c["coupling"], hbar=sys_c["hbar"])
    tables, results, fit_failures = {}, {}, []

    if "a_u_autocorr" in names:
        M = build_rotor_momentum_array(params)
        res = matrix_autocorrelation(M, evo["matrix_max_lag"], use_modulus=True)
        tables["a_u_autocorr.csv"] = _autocorr_table(res)
        _record_fit("a_u", res, results, fit_failures)

    if "s_vn_series" in names or "s_vn_autocorr" in names:
        U = build_floquet_coupled_rotors_continuous(params)
        dims = BipartiteDims(n, n)
        psi0 = _initial_state(cfg["initial_state"], dims, seeds["initial_state"],
                              allowed=("random-product", "basis"))
        plan = EvolutionPlan(dims=dims, dt=params.kick_period,
                             steps=evo["steps"], hbar=params.hbar_value,
                             keep=evo["keep"],
                             check_interval=evo["check_interval"])
        records = list(evolve_floquet(U, psi0, plan))
        series = extract_series(records, "s_vn")
        if "s_vn_series" in names:
            steps = np.arange(len(series))
            tables["s_vn_series.csv"] = (["kick", "s_vn"],
                                         [steps, series.values])
        if "s_vn_autocorr" in names:
            res = _autocorr_diag("s_vn", series, evo["max_lag"],
                                 "s_vn_autocorr.csv", tables, results,
                                 fit_failures)
            if res is None:
                results["s_vn_tail_max"] = None
                results["s_vn_recurrence_count"] = None
            else:
                tail = np.abs(res.values[evo["tail_lag"]:])
                results["s_vn_tail_max"] = float(np.max(tail))
                results["s_vn_recurrence_count"] = int(np.sum(tail > 0.5))
    return tables, results, fit_failures


def _run_harper_pair(cfg: dict, seeds: dict):
    sys_c, evo, cls = cfg["system"], cfg["evolution"], cfg["classical"]
    names = cfg["diagnostics"]["names"]
    sub = TorusParams(num_states=sys_c["num_states"], gamma1=sys_c["gamma1"],
                      gamma2=sys_c["gamma2"])
    params = CoupledHarperParams(subsystem=sub, coupling=sys_c["coupling"])
    tables, results, fit_failures = {}, {"hbar": sub.hbar}, []

    quantum = {"a_h_autocorr", "s_l_series", "s_l_autocorr", "power_spectrum"}
    if quantum & set(names):
        H = build_coupled_harper(params)
        if "a_h_autocorr" in names:
            res = matrix_autocorrelation(H, evo["matrix_max_lag"])
            tables["a_h_autocorr.csv"] = _autocorr_table(res)
            _record_fit("a_h", res, results, fit_failures)
        spectrum = eigh(H)
        if evo["dt"] == 0.0:
            evo["dt"] = anti_alias_dt(spectrum, sub.hbar)
        dims = BipartiteDims(sub.num_states, sub.num_states)
        psi0 = _initial_state(cfg["initial_state"], dims,
                              seeds["initial_state"], torus=sub)
        plan = EvolutionPlan(dims=dims, dt=evo["dt"], steps=evo["steps"],
                             hbar=sub.hbar, keep=evo["keep"],
                             check_interval=evo["check_interval"])
        records = list(evolve_state_spectral(spectrum, psi0, plan))
        s_l = extract_series(records, "s_l")
        if "s_l_series" in names:
            steps = np.arange(len(s_l))
            tables["s_l_series.csv"] = (["step", "time", "s_l"],
                                        [steps, steps * s_l.dt, s_l.values])
        if "s_l_autocorr" in names:
            _autocorr_diag("s_l", s_l, evo["max_lag"], "s_l_autocorr.csv",
                           tables, results, fit_failures)
        if "power_spectrum" in names:
            try:
                ps = power_spectrum(extract_series(records, "purity"))
            except DegenerateSeriesError as exc:
                results["pr"] = None
                fit_failures.append({"diagnostic": "power_spectrum",
                                     "message": str(exc)})
            else:
                tables["power_spectrum.csv"] = (["frequency", "power"],
                                                [ps.frequencies, ps.power])
                results["pr"] = ps.participation_ratio

    if "poincare" in names or "lyapunov" in names:
        points = random_phase_points(cls["orbit_count"], cls["orbit_seed"])
        if "poincare" in names:
            # the integrator's relative drift gate misfires on orbits whose
            # own energy sits near zero, so it is off by default here and the
            # measured absolute drift is recorded instead
            orbit_col, q1, p1, t_col = [], [], [], []
            drift = 0.0
            for k in range(min(cls["poincare_orbits"], points.shape[0])):
                traj = coupled_harper_flow(points[k], params, dt=cls["flow_dt"],
                                           steps=cls["flow_steps"],
                                           check_energy=cls["check_energy"])
                energy = coupled_harper_energy(traj, params)
                drift = max(drift, float(np.max(np.abs(energy - energy[0]))))
                sec = poincare_section(traj, cls["flow_dt"])
                orbit_col.append(np.full(sec.times.shape[0], k, dtype=int))
                q1.append(sec.points[:, 0])
                p1.append(sec.points[:, 1])
                t_col.append(sec.times)
            tables["poincare.csv"] = (
                ["orbit", "q1", "p1", "time"],
                [np.concatenate(orbit_col), np.concatenate(q1),
                 np.concatenate(p1), np.concatenate(t_col)])
            results["flow_energy_drift_max"] = drift
        if "lyapunov" in names:
            exps = np.array([
                lyapunov_largest("coupled-harper", x0, params,
                                 cls["lyapunov_steps"], dt=cls["flow_dt"])
                for x0 in points])
            tables["lyapunov.csv"] = (
                ["orbit", "q1_0", "p1_0", "q2_0", "p2_0", "lyapunov"],
                [np.arange(points.shape[0]), points[:, 0], points[:, 1],
                 points[:, 2], points[:, 3], exps])
            results["lyapunov_median"] = float(np.median(exps))
    return tables, results, fit_failures


def _run_intervals(cfg: dict, seeds: dict):
    sys_c, stats = cfg["system"], cfg["stats"]
    names = cfg["diagnostics"]["names"]
    dim = sys_c["dim"]
    sigma = None if sys_c["sigma"] == 0.0 else sys_c["sigma"]
    first = GoeParams(dim=dim, seed=seeds["matrix"], sigma=sigma)
    sys_c["sigma"] = first.sigma_value
    tables, results, fit_failures = {}, {}, []

    if "nnlsd" in names:
        pooled = []
        for k in range(sys_c["pool"]):
            params = GoeParams(dim=dim, seed=seeds["matrix"] + k,
                               sigma=first.sigma_value)
            pooled.append(level_spacings(eigh(build_goe(params))))
        s_goe = np.concatenate(pooled)
        rng = np.random.default_rng(seeds["reference"])
        s_poisson = rng.exponential(1.0, size=s_goe.shape[0])
        edges = np.linspace(0.0, 4.0, stats["nnlsd_bins"] + 1)
        goe_counts, _ = np.histogram(s_goe, bins=edges)
        poisson_counts, _ = np.histogram(s_poisson, bins=edges)
        tables["nnlsd.csv"] = (
            ["bin_left", "bin_right", "goe_count", "poisson_count"],
            [edges[:-1], edges[1:], goe_counts, poisson_counts])
        results["small_s_fraction_goe"] = float(np.mean(s_goe < 0.1))
        results["small_s_fraction_poisson"] = float(np.mean(s_poisson < 0.1))

    if "omega_support" in names:
        goe_spec = eigh(build_goe(first))
        harper_spec = eigh(build_harper(TorusParams(
            num_states=dim, gamma1=sys_c["gamma1"], gamma2=sys_c["gamma2"])))
        widths = {}
        for label, spec in (("goe", goe_spec), ("harper", harper_spec)):
            # matched mean spacing: rescale each spectrum to unit mean before
            # histogramming the pairwise transition frequencies
            e = spec.eigenvalues / float(np.mean(np.diff(spec.eigenvalues)))
            hist = energy_interval_distribution(
                Spectrum(eigenvalues=e, eigenvectors=spec.eigenvectors),
                hbar=1.0, bins=stats["omega_bins"])
            widths[label] = effective_support_width(hist, stats["occupancy"])
        tables["omega_support.csv"] = (
            ["model", "support_width"],
            [np.array(["goe", "harper"]),
             np.array([widths["goe"], widths["harper"]])])
        results["omega_support_goe"] = widths["goe"]
        results["omega_support_harper"] = widths["harper"]
        results["omega_support_ratio"] = widths["goe"] / widths["harper"]
    return tables, results, fit_failures


def _run_hybrid(cfg: dict, seeds: dict):
    sys_c, evo = cfg["system"], cfg["evolution"]
    names = cfg["diagnostics"]["names"]
    if sys_c["dim_a"] * sys_c["dim_b"] != sys_c["dim"]:
        raise ConfigError(
            f"system.dim_a * system.dim_b must equal system.dim "
            f"({sys_c['dim_a']} * {sys_c['dim_b']} != {sys_c['dim']})")
    goe_params = GoeParams(dim=sys_c["dim"], seed=seeds["matrix"],
                           sigma=sys_c["sigma"])
    H_c = build_goe(goe_params)
    side = math.sqrt(2.0 * math.pi * sys_c["dim"] * sys_c["hbar"])
    H_r = build_harper(TorusParams(
        num_states=sys_c["dim"], gamma1=sys_c["gamma1"],
        gamma2=sys_c["gamma2"], momentum_period=side, position_period=side))
    H_rc = hybrid_hamiltonian(H_r, H_c)
    H_cr = hybrid_hamiltonian(H_c, H_r)
    ordered = [("r", H_r), ("rc", H_rc), ("cr", H_cr), ("c", H_c)]
    spectra = {label: eigh(H) for label, H in ordered}
    tables, results, fit_failures = {}, {}, []

    if "spectra" in names:
        tables["hybrid_spectra.csv"] = (
            ["level", "e_r", "e_rc", "e_cr", "e_c"],
            [np.arange(sys_c["dim"])]
            + [spectra[label].eigenvalues for label, _ in ordered])
        results["spectral_match_rc"] = float(np.max(np.abs(
            spectra["rc"].eigenvalues - spectra["r"].eigenvalues)))
        results["spectral_match_cr"] = float(np.max(np.abs(
            spectra["cr"].eigenvalues - spectra["c"].eigenvalues)))

    if "power_spectrum" in names or "bandwidth" in names:
        if evo["dt"] == 0.0:
            evo["dt"] = anti_alias_dt(spectra["c"], sys_c["hbar"])
        dims = BipartiteDims(sys_c["dim_a"], sys_c["dim_b"])
        psi0 = _initial_state(cfg["initial_state"], dims,
                              seeds["initial_state"], allowed=("random-product",))
        plan = EvolutionPlan(dims=dims, dt=evo["dt"], steps=evo["steps"],
                             hbar=sys_c["hbar"], keep=evo["keep"],
                             check_interval=evo["check_interval"])
        power_cols, freqs = {}, None
        for label, _ in ordered:
            records = evolve_state_spectral(spectra[label], psi0, plan)
            ps = power_spectrum(extract_series(records, "s_l"))
            freqs = ps.frequencies
            power_cols[label] = ps.power
            results[f"pr_{label}"] = ps.participation_ratio
            if "bandwidth" in names:
                results[f"w_{label}"] = spectral_bandwidth(
                    ps, evo["bandwidth_fraction"])
        if "power_spectrum" in names:
            tables["hybrid_power.csv"] = (
                ["frequency", "p_r", "p_rc", "p_cr", "p_c"],
                [freqs] + [power_cols[label] for label, _ in ordered])
    return tables, results, fit_failures


def _run_spectral_check(cfg: dict, seeds: dict):
    sys_c, check = cfg["system"], cfg["check"]
    sub = TorusParams(num_states=sys_c["num_states"], gamma1=sys_c["gamma1"],
                      gamma2=sys_c["gamma2"])
    params = CoupledHarperParams(subsystem=sub, coupling=sys_c["coupling"])
    H = build_coupled_harper(params)
    spectrum = eigh(H)
    if check["dt"] == 0.0:
        check["dt"] = anti_alias_dt(spectrum, sub.hbar)
    dims = BipartiteDims(sub.num_states, sub.num_states)
    psi0 = _initial_state(cfg["initial_state"], dims, seeds["initial_state"],
                          allowed=("random-product",))
    rho0 = np.outer(psi0, psi0.conj())
    plan = EvolutionPlan(dims=dims, dt=check["dt"], steps=check["points"] - 1,
                         hbar=sub.hbar)
    direct = extract_series(evolve_density_spectral(spectrum, rho0, plan),
                            "purity")
    times = np.arange(check["points"]) * check["dt"]
    recon = trace_rho_squared_spectral(spectrum, rho0, dims, times, sub.hbar)
    diff = np.abs(direct.values - recon)
    tables = {"trace_rho_sq.csv": (
        ["time", "direct", "spectral", "abs_diff"],
        [times, direct.values, recon, diff])}
    results = {"max_abs_diff": float(np.max(diff)), "hbar": sub.hbar}
    return tables, results, []


_PIPELINES = {
    "spin-proto": _run_spin_proto,
    "rotors": _run_rotors,
    "harper-pair": _run_harper_pair,
    "intervals": _run_intervals,
    "hybrid": _run_hybrid,
    "spectral-check": _run_spectral_check,
}


# ---------------------------------------------------------------------------
# runner and comparison


def run_experiment(config, out_dir=None, seed=None) -> RunManifest:
    """Run one experiment and write its outputs.

    config may be a mapping, a TOML config path, or a manifest JSON path (the
    echoed config is rerun as-is, which reproduces the CSVs byte for byte).
    out_dir and seed override the config when given. Returns the manifest,
    which is also written as manifest.json next to the outputs.
    """
    raw = load_config(config)
    if seed is not None:
        raw["seed"] = seed
    cfg = resolve_config(raw)
    out = resolve_out_dir(cfg, out_dir)
    seeds = _derive_seeds(cfg["seed"])
    started = time.perf_counter()
    tables, results, fit_failures = _PIPELINES[cfg["experiment"]](cfg, seeds)

    out.mkdir(parents=True, exist_ok=True)
    for name, (header, columns) in tables.items():
        _write_csv(out / name, header, columns)
    results = _jsonify(results)
    (out / "results.json").write_text(
        json.dumps(results, indent=2, sort_keys=True) + "\n", encoding="ascii")
    checksums = {}
    for name in sorted(list(tables) + ["results.json"]):
        digest = hashlib.sha256((out / name).read_bytes()).hexdigest()
        checksums[name] = digest

    manifest = RunManifest(
        experiment=cfg["experiment"], config=_jsonify(cfg), seeds=seeds,
        versions={"rdmflux": __version__,
                  "python": platform.python_version(),
                  "numpy": np.__version__, "scipy": scipy.__version__},
        kernel_backend=kernel_backend(),
        wall_time_s=time.perf_counter() - started,
        outputs=checksums, results=results, fit_failures=fit_failures,
        path=str(out / "manifest.json"))
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="ascii")
    return manifest


def _ordering_value(results: dict, key: str, side: str):
    if key not in results:
        raise ValidationError(
            f"run {side} is missing diagnostic result {key!r}; "
            f"rerun with the diagnostic enabled")
    value = results[key]
    if value is None:
        # a correlation fit that failed because the series never decays
        # counts as an infinite correlation length for ordering purposes
        if results.get(key.replace("_l_c", "_no_decay")):
            return math.inf
        return math.nan
    return float(value)


def compare_runs(manifest_a, manifest_b) -> dict:
    """Compare two runs of the same experiment.

    Run A is the putatively chaotic one. The report carries the shared scalar
    results with their A/B ratios and a verdict per declared ordering
    assertion: pass, fail, or "no separation" when the two values coincide.
    Mismatched experiments or a missing diagnostic raise ValidationError.
    """
    ma = manifest_a if isinstance(manifest_a, RunManifest) else load_manifest(manifest_a)
    mb = manifest_b if isinstance(manifest_b, RunManifest) else load_manifest(manifest_b)
    if ma.experiment != mb.experiment:
        raise ValidationError(
            f"cannot compare different experiments: "
            f"{ma.experiment!r} vs {mb.experiment!r}")
    if ma.config["diagnostics"]["names"] != mb.config["diagnostics"]["names"]:
        raise ValidationError("runs selected different diagnostics")

    values = {}
    for key in sorted(set(ma.results) & set(mb.results)):
        va, vb = ma.results[key], mb.results[key]
        if isinstance(va, bool) or not isinstance(va, (int, float, type(None))):
            continue
        ratio = None
        if isinstance(va, (int, float)) and isinstance(vb, (int, float)) and vb != 0:
            ratio = va / vb
        values[key] = {"a": va, "b": vb, "ratio": ratio}

    assertions = []
    for key, relation, threshold in ORDERING_ASSERTIONS[ma.experiment]:
        va = _ordering_value(ma.results, key, "A")
        vb = _ordering_value(mb.results, key, "B")
        if math.isnan(va) or math.isnan(vb):
            verdict, detail = "fail", "fit unavailable"
        elif va == vb:
            verdict, detail = "no separation", f"both {_fmt(va)}"
        elif relation == "less":
            verdict = "pass" if va < vb else "fail"
            detail = f"A={_fmt(va)} vs B={_fmt(vb)}"
        elif relation == "greater":
            verdict = "pass" if va > vb else "fail"
            detail = f"A={_fmt(va)} vs B={_fmt(vb)}"
        else:
            ratio = math.inf if vb == 0 else va / vb
            verdict = "pass" if ratio > threshold else "fail"
            detail = f"A/B={_fmt(ratio)} needs > {_fmt(threshold)}"
        assertions.append({"diagnostic": key, "relation": relation,
                           "threshold": threshold, "verdict": verdict,
                           "detail": detail})
    return {"experiment": ma.experiment, "values": values,
            "assertions": assertions}

"""Release acceptance checks at full scale.

One test per criterion. Each prints a single PASS/FAIL line with the
measured numbers (shown live with pytest -s, and always on failure) and
enforces its wall-clock budget. Scales are the release targets, so this
module is slower than the unit suites.
"""

import math
import time

import numpy as np

from rdmflux.diagnostics import (
    matrix_autocorrelation,
    trace_rho_squared_spectral,
)
from rdmflux.dynamics import (
    EvolutionPlan,
    anti_alias_dt,
    evolve_density_spectral,
    evolve_floquet,
    evolve_state_spectral,
)
from rdmflux.experiments import run_experiment
from rdmflux.hamiltonians import (
    CoupledHarperParams,
    RotorParams,
    TorusParams,
    build_coupled_harper,
    build_floquet_coupled_rotors,
)
from rdmflux.linalg import (
    BipartiteDims,
    dft_unitary,
    eigh,
    partial_trace,
    random_pure_product,
    tensor_product,
)

TINY_PAIR = {
    "experiment": "harper-pair",
    "system": {"num_states": 6},
    "evolution": {"steps": 256, "max_lag": 64, "matrix_max_lag": 20},
    "classical": {"orbit_count": 4, "poincare_orbits": 2,
                  "flow_steps": 2000, "lyapunov_steps": 2000},
}


def report(criterion, ok, detail, elapsed, budget=None):
    if budget is not None and elapsed >= budget:
        ok = False
        detail += f"; over {budget:.0f}s budget"
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail} ({elapsed:.1f}s)"
    print("\n" + line)
    assert ok, line


def random_density(dim, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def mixed_product_density(dims, seed):
    weights = (0.5, 0.3, 0.2)
    rho = np.zeros((dims.dim, dims.dim), dtype=complex)
    for k, w in enumerate(weights):
        psi = random_pure_product(dims, seed=seed + k)
        rho += w * np.outer(psi, psi.conj())
    return rho


def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0

    for da, db in ((4, 4), (2, 8)):
        dims = BipartiteDims(da, db)
        rho = random_density(da * db, seed=da * 100 + db)
        got_a = partial_trace(rho, dims, keep="A")
        got_b = partial_trace(rho, dims, keep="B")
        oracle_a = np.zeros((da, da), dtype=complex)
        oracle_b = np.zeros((db, db), dtype=complex)
        for a in range(da):
            for a2 in range(da):
                for b in range(db):
                    oracle_a[a, a2] += rho[a * db + b, a2 * db + b]
        for b in range(db):
            for b2 in range(db):
                for a in range(da):
                    oracle_b[b, b2] += rho[a * db + b, a * db + b2]
        worst = max(worst, float(np.max(np.abs(got_a - oracle_a))),
                    float(np.max(np.abs(got_b - oracle_b))))

    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    got = tensor_product(A, B)
    oracle = np.zeros((12, 12), dtype=complex)
    for i in range(4):
        for j in range(4):
            for k in range(3):
                for l in range(3):
                    oracle[i * 3 + k, j * 3 + l] = A[i, j] * B[k, l]
    worst = max(worst, float(np.max(np.abs(got - oracle))))

    H = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    for use_modulus in (False, True):
        got = matrix_autocorrelation(H, max_lag=8, use_modulus=use_modulus)
        x = np.abs(H) if use_modulus else H
        vals = np.zeros(9)
        for m in range(9):
            acc = 0.0
            for i in range(16 - m):
                for j in range(16 - m):
                    acc += (x[i, j] * np.conj(x[i + m, j + m])).real
            vals[m] = acc / ((16 - m) * (16 - m))
        vals /= vals[0]
        worst = max(worst, float(np.max(np.abs(got.values - vals))))

    params = CoupledHarperParams(
        TorusParams(4, gamma1=1.3, gamma2=0.7), coupling=0.9)
    got = build_coupled_harper(params)
    n = 4
    F = np.zeros((n, n), dtype=complex)
    for k in range(n):
        for j in range(n):
            F[k, j] = np.exp(-2j * np.pi * k * j / n) / math.sqrt(n)
    H1 = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for j2 in range(n):
            for k in range(n):
                H1[j, j2] += 1.3 * np.conj(F[k, j]) \
                    * np.cos(2.0 * np.pi * k / n) * F[k, j2]
            if j == j2:
                H1[j, j2] += 0.7 * np.cos(2.0 * np.pi * j / n)
    H1 = 0.5 * (H1 + H1.conj().T)
    oracle = np.zeros((16, 16), dtype=complex)
    for a in range(n):
        for b in range(n):
            for a2 in range(n):
                for b2 in range(n):
                    val = 0.0
                    if b == b2:
                        val += H1[a, a2]
                    if a == a2:
                        val += H1[b, b2]
                    if a == a2 and b == b2:
                        val += 0.9 * np.sin(2.0 * np.pi * a / n) \
                            * np.sin(2.0 * np.pi * b / n)
                    oracle[a * n + b, a2 * n + b2] = val
    worst = max(worst, float(np.max(np.abs(got - oracle))))

    report("criterion 1 (oracle equivalence)", worst < 1.0e-12,
           f"max deviation {worst:.3e} < 1e-12",
           time.perf_counter() - t0, budget=10.0)


def test_criterion_2_conservation_suite():
    t0 = time.perf_counter()
    # check_interval=1 makes every evolver enforce its conservation law at
    # every one of the 4096 steps (trace 1e-10, purity 1e-9, norm 1e-12),
    # aborting the run on the first breach.
    dims32 = BipartiteDims(32, 32)

    U = build_floquet_coupled_rotors(
        RotorParams(32, kick1=10.0, kick2=10.0, coupling=2.0))
    unitarity = float(np.linalg.norm(
        U.conj().T @ U - np.eye(1024, dtype=complex)))
    plan = EvolutionPlan(dims=dims32, dt=1.0, steps=4096, check_interval=1)
    psi0 = random_pure_product(dims32, seed=3)
    floquet_drift = max(
        abs(np.trace(r.rdm).real - 1.0)
        for r in evolve_floquet(U, psi0, plan))

    sub = TorusParams(32)
    spectrum = eigh(build_coupled_harper(CoupledHarperParams(sub, coupling=1.0)))
    dt = anti_alias_dt(spectrum, sub.hbar)
    plan = EvolutionPlan(dims=dims32, dt=dt, steps=4096, hbar=sub.hbar,
                         check_interval=1)
    psi0 = random_pure_product(dims32, seed=4)
    state_drift = max(
        abs(np.trace(r.rdm).real - 1.0)
        for r in evolve_state_spectral(spectrum, psi0, plan))

    sub = TorusParams(12)
    dims12 = BipartiteDims(12, 12)
    spectrum = eigh(build_coupled_harper(CoupledHarperParams(sub, coupling=1.0)))
    dt = anti_alias_dt(spectrum, sub.hbar)
    plan = EvolutionPlan(dims=dims12, dt=dt, steps=4096, hbar=sub.hbar,
                         check_interval=1)
    rho0 = mixed_product_density(dims12, seed=5)
    trace_drift = max(
        abs(np.trace(r.rdm).real - 1.0)
        for r in evolve_density_spectral(spectrum, rho0, plan))

    ok = (unitarity < 1.0e-10 * 1024 and floquet_drift < 2.0e-12
          and state_drift < 2.0e-12 and trace_drift < 1.0e-10)
    report("criterion 2 (conservation suite)", ok,
           f"unitarity {unitarity:.2e} < 1.0e-7, norm drifts "
           f"{floquet_drift:.2e}/{state_drift:.2e}, trace drift "
           f"{trace_drift:.2e}, per-step checks on",
           time.perf_counter() - t0, budget=300.0)


def test_criterion_3_spectral_trace_reconstruction():
    t0 = time.perf_counter()
    sub = TorusParams(6)
    dims = BipartiteDims(6, 6)
    spectrum = eigh(build_coupled_harper(CoupledHarperParams(sub, coupling=1.0)))
    psi0 = random_pure_product(dims, seed=5)
    rho0 = np.outer(psi0, psi0.conj())
    dt = anti_alias_dt(spectrum, sub.hbar)
    times = dt * np.arange(100)
    reconstructed = trace_rho_squared_spectral(
        spectrum, rho0, dims, times, hbar=sub.hbar)
    plan = EvolutionPlan(dims=dims, dt=dt, steps=99, hbar=sub.hbar)
    direct = np.array(
        [r.purity for r in evolve_density_spectral(spectrum, rho0, plan)])
    worst = float(np.max(np.abs(reconstructed - direct)))
    report("criterion 3 (spectral trace reconstruction)", worst < 1.0e-9,
           f"max |spectral - direct| {worst:.3e} over 100 points, dim 36",
           time.perf_counter() - t0, budget=60.0)


def test_criterion_4_spin_prototype_separation(tmp_path):
    t0 = time.perf_counter()
    l_c = {"goe": {"a_h": [], "s_l": []}, "harper": {"a_h": [], "s_l": []}}
    for seed in range(5):
        for model in ("goe", "harper"):
            m = run_experiment(
                {"experiment": "spin-proto", "system": {"model": model}},
                out_dir=tmp_path / f"{model}-{seed}", seed=seed)
            assert m.results["a_h_l_c"] is not None
            assert m.results["s_l_l_c"] is not None
            l_c[model]["a_h"].append(m.results["a_h_l_c"])
            l_c[model]["s_l"].append(m.results["s_l_l_c"])
    means = {model: {k: float(np.mean(v)) for k, v in kinds.items()}
             for model, kinds in l_c.items()}
    ok = (3.0 * means["goe"]["s_l"] <= means["harper"]["s_l"]
          and 3.0 * means["goe"]["a_h"] <= means["harper"]["a_h"])
    report("criterion 4 (spin prototype separation)", ok,
           f"mean l_c over 5 seeds: s_l {means['goe']['s_l']:.2f} vs "
           f"{means['harper']['s_l']:.2f}, a_h {means['goe']['a_h']:.2f} vs "
           f"{means['harper']['a_h']:.2f}, factor 3 required",
           time.perf_counter() - t0, budget=300.0)


def test_criterion_5_coupled_harper_pair(tmp_path):
    t0 = time.perf_counter()
    strong = run_experiment({"experiment": "harper-pair"},
                            out_dir=tmp_path / "strong", seed=1).results
    weak = run_experiment(
        {"experiment": "harper-pair", "system": {"coupling": 0.1}},
        out_dir=tmp_path / "weak", seed=1).results
    assert strong["pr"] is not None and weak["pr"] is not None
    assert strong["s_l_l_c"] is not None and weak["s_l_l_c"] is not None
    ok = (strong["pr"] > 3.0 * weak["pr"]
          and strong["s_l_l_c"] < weak["s_l_l_c"]
          and strong["lyapunov_median"] > 0.05
          and weak["lyapunov_median"] < 0.02)
    report("criterion 5 (coupled Harper pair)", ok,
           f"PR {strong['pr']:.1f} vs {weak['pr']:.2f} (>3x), s_l l_c "
           f"{strong['s_l_l_c']:.1f} < {weak['s_l_l_c']:.1f}, lambda "
           f"{strong['lyapunov_median']:.3f} > 0.05 vs "
           f"{weak['lyapunov_median']:.4f} < 0.02",
           time.perf_counter() - t0, budget=300.0)


def test_criterion_6_coupled_rotors(tmp_path):
    t0 = time.perf_counter()
    kicks = {"chaotic": (10.0, 10.0), "regular": (0.1, 0.1),
             "asymmetric": (0.0, 10.0)}
    runs = {}
    for label, (k1, k2) in kicks.items():
        m = run_experiment(
            {"experiment": "rotors", "system": {"kick1": k1, "kick2": k2}},
            out_dir=tmp_path / label)
        runs[label] = m.results
    for label in kicks:
        assert runs[label]["a_u_l_c"] is not None
        assert runs[label]["s_vn_tail_max"] is not None
    ok = (runs["chaotic"]["a_u_l_c"] < runs["regular"]["a_u_l_c"]
          and runs["chaotic"]["s_vn_tail_max"] < 0.2
          and runs["regular"]["s_vn_recurrence_count"] >= 2
          and runs["asymmetric"]["a_u_l_c"] < runs["regular"]["a_u_l_c"]
          and runs["asymmetric"]["s_vn_tail_max"] < 0.2)
    report("criterion 6 (coupled rotors)", ok,
           f"a_u l_c {runs['chaotic']['a_u_l_c']:.1f}/"
           f"{runs['asymmetric']['a_u_l_c']:.1f} < "
           f"{runs['regular']['a_u_l_c']:.1f}, s_vn tail "
           f"{runs['chaotic']['s_vn_tail_max']:.3f}/"
           f"{runs['asymmetric']['s_vn_tail_max']:.3f} < 0.2, regular "
           f"recurrences {runs['regular']['s_vn_recurrence_count']}",
           time.perf_counter() - t0, budget=600.0)


def test_criterion_7_spectral_statistics(tmp_path):
    t0 = time.perf_counter()
    r = run_experiment({"experiment": "intervals"},
                       out_dir=tmp_path / "run").results
    ok = (r["small_s_fraction_goe"] < 0.02
          and r["small_s_fraction_poisson"] > 0.08
          and r["omega_support_ratio"] >= 1.5)
    report("criterion 7 (spectral statistics)", ok,
           f"s<0.1 fraction {r['small_s_fraction_goe']:.4f} < 0.02 vs "
           f"{r['small_s_fraction_poisson']:.4f} > 0.08, omega support ratio "
           f"{r['omega_support_ratio']:.2f} >= 1.5",
           time.perf_counter() - t0, budget=60.0)


def test_criterion_8_hybrid_hamiltonians(tmp_path):
    t0 = time.perf_counter()
    pr_hits = w_hits = 0
    worst_match = 0.0
    chains = []
    for seed in range(5):
        r = run_experiment({"experiment": "hybrid"},
                           out_dir=tmp_path / f"s{seed}", seed=seed).results
        worst_match = max(worst_match, r["spectral_match_rc"],
                          r["spectral_match_cr"])
        pr = [r[f"pr_{k}"] for k in ("r", "rc", "cr", "c")]
        w = [r[f"w_{k}"] for k in ("r", "rc", "cr", "c")]
        pr_hits += pr[0] <= pr[1] <= pr[2] <= pr[3]
        w_hits += w[0] <= w[1] <= w[2] <= w[3]
        chains.append(pr)
    ok = worst_match < 1.0e-9 and pr_hits >= 4 and w_hits >= 4
    last = "/".join(f"{v:.0f}" for v in chains[-1])
    report("criterion 8 (hybrid Hamiltonians)", ok,
           f"spectral residual {worst_match:.2e} < 1e-9, PR chain {pr_hits}/5 "
           f"(last seed {last}), bandwidth chain {w_hits}/5",
           time.perf_counter() - t0, budget=300.0)


def test_criterion_9_manifest_determinism(tmp_path):
    t0 = time.perf_counter()
    checked = 0
    for name, cfg in (("check", {"experiment": "spectral-check"}),
                      ("pair", TINY_PAIR)):
        first = run_experiment(cfg, out_dir=tmp_path / f"{name}-a")
        second = run_experiment(first.path, out_dir=tmp_path / f"{name}-b")
        assert first.outputs == second.outputs
        for out in first.outputs:
            a = (tmp_path / f"{name}-a" / out).read_bytes()
            b = (tmp_path / f"{name}-b" / out).read_bytes()
            assert a == b, f"{name}/{out} differs between reruns"
            checked += 1
    report("criterion 9 (manifest determinism)", checked >= 8,
           f"{checked} output files byte-identical after rerun from manifest",
           time.perf_counter() - t0)

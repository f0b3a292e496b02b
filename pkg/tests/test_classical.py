import math

import numpy as np
import pytest

from rdmflux._kernels import backend
from rdmflux.classical import (
    StandardMapParams,
    classical_autocorrelation,
    classical_observable,
    coupled_harper_energy,
    coupled_harper_flow,
    coupled_rotor_map_step,
    coupled_rotor_trajectory,
    lyapunov_largest,
    poincare_section,
    random_phase_points,
    standard_map_step,
    standard_map_trajectory,
)
from rdmflux.errors import DegenerateSeriesError, IntegratorError, ValidationError
from rdmflux.hamiltonians import CoupledHarperParams, RotorParams, TorusParams

TWO_PI = 2.0 * math.pi

needs_compiled = pytest.mark.skipif(
    backend() == "numpy", reason="orbit length impractical without compiled kernels")

SUB = TorusParams(num_states=10, gamma1=2.0, gamma2=2.0)
# regular initial condition of the weakly coupled flow whose orbit crosses q2=0
REGULAR_X0 = random_phase_points(20, seed=7)[4]


def fd_jacobian(f, x, h=1.0e-6):
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return J


class TestStandardMap:
    def test_free_rotor_is_linear(self):
        q0, p0, tau = 0.7, 1.9, 1.0
        traj = standard_map_trajectory(np.array([q0, p0]), 0.0, tau, 1000)
        t = np.arange(1001)
        assert np.allclose(traj[:, 1], p0, atol=1e-12)
        assert np.allclose(traj[:, 0], (q0 + tau * p0 * t) % TWO_PI, atol=1e-9)

    def test_trajectory_matches_single_steps(self):
        x = np.array([1.0, 1.3])
        traj = standard_map_trajectory(x, 1.5, 1.0, 25)
        cur = x
        for row in traj:
            assert np.allclose(row, cur, atol=1e-12)
            cur = standard_map_step(cur, 1.5, 1.0)

    def test_area_preservation(self):
        pts = random_phase_points(100, seed=51, periods=(TWO_PI, TWO_PI))
        for x in pts:
            J = fd_jacobian(lambda y: standard_map_step(y, 1.5, 1.0), x)
            assert abs(np.linalg.det(J) - 1.0) < 1e-6

    def test_twin_orbits_diverge_fast_at_strong_kick(self):
        a = standard_map_trajectory(np.array([1.0, 1.3]), 10.0, 1.0, 40)
        b = standard_map_trajectory(np.array([1.0, 1.3 + 1e-8]), 10.0, 1.0, 40)
        d = np.abs(a - b)
        sep = np.sqrt((np.minimum(d, TWO_PI - d) ** 2).sum(axis=1))
        assert sep[5] < 1e-4
        assert sep.max() > 1.0

    def test_step_count_guard(self):
        with pytest.raises(ValidationError):
            standard_map_trajectory(np.array([1.0, 1.0]), 1.0, 1.0, 0)


class TestCoupledRotorMap:
    def test_uncoupled_reduces_to_independent_maps(self):
        params = RotorParams(num_states=4, kick1=1.2, kick2=0.7, coupling=0.0)
        x0 = np.array([1.0, 2.0, 4.0, 0.5])
        traj = coupled_rotor_trajectory(x0, params, 30)
        t1 = standard_map_trajectory(x0[:2], 1.2, 1.0, 30)
        t2 = standard_map_trajectory(x0[2:], 0.7, 1.0, 30)
        assert np.allclose(traj[:, :2], t1, atol=1e-12)
        assert np.allclose(traj[:, 2:], t2, atol=1e-12)

    def test_trajectory_matches_single_steps(self):
        params = RotorParams(num_states=4, kick1=3.0, kick2=1.0, coupling=2.0)
        x = np.array([0.3, 1.1, 2.2, 5.0])
        traj = coupled_rotor_trajectory(x, params, 20)
        cur = x
        for row in traj:
            assert np.allclose(row, cur, atol=1e-12)
            cur = coupled_rotor_map_step(cur, params)

    def test_kick_impulse_is_potential_gradient(self):
        params = RotorParams(num_states=4, kick1=2.0, kick2=0.5, coupling=1.5,
                             kick_period=0.7)
        q1, p1, q2, p2 = 0.8, 0.9, 2.1, 1.2
        out = coupled_rotor_map_step(np.array([q1, p1, q2, p2]), params)
        f1 = 2.0 * math.sin(q1) - 1.5 * math.cos(q1) * math.sin(q2)
        f2 = 0.5 * math.sin(q2) - 1.5 * math.sin(q1) * math.cos(q2)
        want_p1 = (p1 + 0.7 * f1) % TWO_PI
        want_p2 = (p2 + 0.7 * f2) % TWO_PI
        assert out[1] == pytest.approx(want_p1, abs=1e-14)
        assert out[3] == pytest.approx(want_p2, abs=1e-14)
        assert out[0] == pytest.approx((q1 + 0.7 * want_p1) % TWO_PI, abs=1e-14)
        assert out[2] == pytest.approx((q2 + 0.7 * want_p2) % TWO_PI, abs=1e-14)

    def test_volume_preservation(self):
        params = RotorParams(num_states=4, kick1=3.0, kick2=1.0, coupling=2.0)
        pts = random_phase_points(100, seed=52)
        for x in pts:
            J = fd_jacobian(lambda y: coupled_rotor_map_step(y, params), x)
            assert abs(np.linalg.det(J) - 1.0) < 1e-6

    def test_free_limit_freezes_momenta(self):
        params = RotorParams(num_states=4, kick1=0.0, kick2=0.0, coupling=0.0)
        x0 = np.array([1.0, 2.5, 3.0, 0.25])
        traj = coupled_rotor_trajectory(x0, params, 50)
        assert np.allclose(traj[:, 1], 2.5, atol=1e-12)
        assert np.allclose(traj[:, 3], 0.25, atol=1e-12)


class TestHarperFlow:
    def test_uncoupled_conserves_subsystem_energies(self):
        params = CoupledHarperParams(SUB, 0.0)
        traj = coupled_harper_flow(REGULAR_X0, params, dt=1e-3, steps=10000)
        e1 = 2.0 * (np.cos(traj[:, 1]) + np.cos(traj[:, 0]))
        e2 = 2.0 * (np.cos(traj[:, 3]) + np.cos(traj[:, 2]))
        assert np.max(np.abs(e1 - e1[0])) < 1e-8
        assert np.max(np.abs(e2 - e2[0])) < 1e-8

    def test_energy_within_drift_bound_on_long_chaotic_run(self):
        params = CoupledHarperParams(SUB, 10.0)
        traj = coupled_harper_flow(np.array([1.0, 0.5, 2.0, 1.0]), params,
                                   dt=1e-2, steps=30000)
        e = coupled_harper_energy(traj, params)
        drift = np.max(np.abs(e - e[0]))
        assert drift < 1e-6 * abs(e[0]) * 30000 * 1e-4

    def test_time_reversal_through_momentum_reflection(self):
        params = CoupledHarperParams(SUB, 0.1)
        fwd = coupled_harper_flow(REGULAR_X0, params, dt=1e-2, steps=1000)
        xr = fwd[-1].copy()
        xr[1] = (TWO_PI - xr[1]) % TWO_PI
        xr[3] = (TWO_PI - xr[3]) % TWO_PI
        back = coupled_harper_flow(xr, params, dt=1e-2, steps=1000)
        xe = back[-1].copy()
        xe[1] = (TWO_PI - xe[1]) % TWO_PI
        xe[3] = (TWO_PI - xe[3]) % TWO_PI
        d = np.abs(xe - REGULAR_X0)
        assert np.max(np.minimum(d, TWO_PI - d)) < 1e-9

    def test_coarse_step_trips_drift_bound(self):
        params = CoupledHarperParams(SUB, 10.0)
        with pytest.raises(IntegratorError):
            coupled_harper_flow(np.array([1.0, 0.5, 2.0, 1.0]), params,
                                dt=0.3, steps=200)
        # same run without the check completes
        traj = coupled_harper_flow(np.array([1.0, 0.5, 2.0, 1.0]), params,
                                   dt=0.3, steps=200, check_energy=False)
        assert traj.shape == (201, 4)

    def test_argument_guards(self):
        params = CoupledHarperParams(SUB, 1.0)
        with pytest.raises(ValidationError):
            coupled_harper_flow(REGULAR_X0, params, dt=0.0, steps=10)
        with pytest.raises(ValidationError):
            coupled_harper_flow(REGULAR_X0, params, dt=1e-2, steps=0)

    def test_energy_function_matches_hand_formula(self):
        params = CoupledHarperParams(SUB, 3.0)
        x = np.array([0.4, 1.3, 2.7, 5.1])
        want = (2.0 * (math.cos(1.3) + math.cos(5.1))
                + 2.0 * (math.cos(0.4) + math.cos(2.7))
                + 3.0 * math.sin(0.4) * math.sin(2.7))
        assert coupled_harper_energy(x, params)[0] == pytest.approx(want, abs=1e-14)


class TestPoincareSection:
    def build_traj(self, t, q1, p1, q2, p2=0.0):
        n = t.size
        cols = [np.broadcast_to(np.asarray(c, dtype=float), (n,)) for c in (q1, p1, q2)]
        return np.column_stack(cols + [np.full(n, p2)])

    def test_linear_rotation_crossings_are_exact(self):
        dt = 0.05
        t = np.arange(0.0, 40.0, dt)
        q2 = (0.3 + 0.5 * t) % TWO_PI
        q1 = (0.1 + 0.2 * t) % TWO_PI
        sec = poincare_section(self.build_traj(t, q1, 1.7, q2), dt)
        # q2 hits 0 (mod 2pi) upward at t = (2pi k - 0.3) / 0.5
        want_times = [(TWO_PI * k - 0.3) / 0.5 for k in range(1, 4)]
        want_times = [w for w in want_times if w < t[-1]]
        assert sec.times.shape[0] == len(want_times)
        assert np.allclose(sec.times, want_times, atol=1e-9)
        want_q1 = (0.1 + 0.2 * np.asarray(want_times)) % TWO_PI
        assert np.allclose(sec.points[:, 0], want_q1, atol=1e-9)
        assert np.allclose(sec.points[:, 1], 1.7, atol=1e-12)

    def test_sine_track_crosses_once_per_period(self):
        dt = 0.05
        t = np.arange(0.0, 6.0 * TWO_PI, dt)
        sec = poincare_section(self.build_traj(t, 1.0, 2.0, np.sin(t) % TWO_PI), dt)
        # upward zero crossings of sin t at t = 2 pi k only
        assert sec.times.shape[0] == 5
        assert np.allclose(sec.times, TWO_PI * np.arange(1, 6), atol=1e-3)

    def test_never_crossing_gives_empty(self):
        dt = 0.1
        t = np.arange(0.0, 30.0, dt)
        sec = poincare_section(self.build_traj(t, 1.0, 2.0, 2.0 + 0.5 * np.sin(t)), dt)
        assert sec.points.shape == (0, 2)
        assert sec.times.shape == (0,)

    def test_downward_crossings_ignored(self):
        dt = 0.05
        t = np.arange(0.0, 40.0, dt)
        q2 = (-0.5 * t) % TWO_PI
        sec = poincare_section(self.build_traj(t, 1.0, 2.0, q2), dt)
        assert sec.points.shape[0] == 0

    def test_custom_plane(self):
        dt = 0.05
        t = np.arange(0.0, 40.0, dt)
        q2 = (0.5 * t) % TWO_PI
        sec = poincare_section(self.build_traj(t, 1.0, 2.0, q2), dt, plane_value=1.0)
        want = [(1.0 + TWO_PI * k) / 0.5 for k in range(4)]
        want = [w for w in want if w < t[-1] - dt]
        assert np.allclose(sec.times, want, atol=1e-9)

    def test_shape_guard(self):
        with pytest.raises(ValidationError):
            poincare_section(np.zeros((10, 3)), 0.1)

    @needs_compiled
    def test_weak_coupling_section_lies_on_thin_curves(self):
        params = CoupledHarperParams(SUB, 0.1)
        traj = coupled_harper_flow(REGULAR_X0, params, dt=1e-2, steps=7000000)
        pts = poincare_section(traj, 1e-2).points
        assert pts.shape[0] >= 10000
        stride = max(1, pts.shape[0] // 60)
        for idx in range(0, pts.shape[0], stride):
            d1 = ((pts[:, 0] - pts[idx, 0] + math.pi) % TWO_PI) - math.pi
            d2 = ((pts[:, 1] - pts[idx, 1] + math.pi) % TWO_PI) - math.pi
            nb = np.argsort(d1 * d1 + d2 * d2)[:50]
            cloud = np.column_stack([d1[nb], d2[nb]])
            cloud -= cloud.mean(axis=0)
            s = np.linalg.svd(cloud, compute_uv=False)
            assert s[1] / s[0] < 0.05


class TestLyapunov:
    def test_free_standard_map_is_not_exponential(self):
        lam = lyapunov_largest("standard-map", np.array([1.0, 1.3]),
                               StandardMapParams(0.0), steps=20000)
        assert lam <= 0.01

    def test_strong_kick_matches_large_k_estimate(self):
        lam = lyapunov_largest("standard-map", np.array([1.0, 1.3]),
                               StandardMapParams(10.0), steps=20000)
        assert lam == pytest.approx(math.log(5.0), rel=0.2)

    def test_strongly_kicked_pair_is_chaotic(self):
        params = RotorParams(num_states=4, kick1=10.0, kick2=10.0, coupling=2.0)
        lam = lyapunov_largest("coupled-rotors", np.array([1.0, 1.3, 2.0, 0.5]),
                               params, steps=20000)
        assert lam > 1.0

    @needs_compiled
    def test_coupling_strength_separates_flow_exponents(self):
        pts = random_phase_points(20, seed=7)
        med = {}
        for c in (10.0, 0.1):
            params = CoupledHarperParams(SUB, c)
            lams = [lyapunov_largest("coupled-harper", x, params,
                                     steps=100000, dt=1e-2) for x in pts]
            med[c] = float(np.median(lams))
        assert med[10.0] > 0.05
        assert med[0.1] < 0.02

    def test_unknown_system(self):
        with pytest.raises(ValidationError):
            lyapunov_largest("pendulum", np.array([1.0, 1.0]),
                             StandardMapParams(1.0), steps=10)


class TestObservables:
    def test_free_rotation_stays_correlated(self):
        traj = standard_map_trajectory(np.array([1.0, 1.3]), 0.0, 1.0, 2000)
        res = classical_autocorrelation(traj, max_lag=200)
        assert np.max(np.abs(res.values[20:])) > 0.5

    def test_strong_kick_decorrelates(self):
        traj = standard_map_trajectory(np.array([1.0, 1.3]), 10.0, 1.0, 20000)
        res = classical_autocorrelation(traj, max_lag=200)
        assert np.max(np.abs(res.values[20:])) < 0.1

    def test_frozen_orbit_is_degenerate(self):
        traj = standard_map_trajectory(np.array([0.0, 0.0]), 0.0, 1.0, 100)
        with pytest.raises(DegenerateSeriesError):
            classical_autocorrelation(traj, max_lag=20)

    def test_observable_columns(self):
        traj = np.array([[0.1, 0.2, 0.3, 0.4], [1.0, 2.0, 3.0, 4.0]])
        assert np.allclose(classical_observable(traj, "cos_q1"), np.cos([0.1, 1.0]))
        assert np.allclose(classical_observable(traj, "cos_q2"), np.cos([0.3, 3.0]))
        assert np.allclose(classical_observable(traj, "p1"), [0.2, 2.0])
        with pytest.raises(ValidationError):
            classical_observable(traj, "sin_q9")
        with pytest.raises(ValidationError):
            classical_observable(np.zeros((5, 2)), "cos_q2")


class TestRandomPhasePoints:
    def test_deterministic_and_in_range(self):
        a = random_phase_points(50, seed=3)
        b = random_phase_points(50, seed=3)
        assert np.array_equal(a, b)
        assert a.shape == (50, 4)
        assert np.all((a >= 0.0) & (a < TWO_PI))

    def test_custom_periods(self):
        pts = random_phase_points(200, seed=4, periods=(1.0, 5.0))
        assert pts.shape == (200, 2)
        assert pts[:, 1].max() > 2.5
        assert pts[:, 0].max() < 1.0

"""Classical counterparts of the quantum models: kicked maps on the 2-torus,
the coupled Harper flow, Poincaré sections, and Benettin Lyapunov exponents.

Phase points are plain float arrays, (q, p) for one rotor and
(q1, p1, q2, p2) for coupled systems, wrapped into [0, period).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import IntegratorError, ValidationError
from .hamiltonians import TWO_PI, CoupledHarperParams, RotorParams

__all__ = [
    "StandardMapParams",
    "SectionPoints",
    "standard_map_step",
    "coupled_rotor_map_step",
    "standard_map_trajectory",
    "coupled_rotor_trajectory",
    "coupled_harper_flow",
    "coupled_harper_energy",
    "poincare_section",
    "lyapunov_largest",
    "classical_observable",
    "classical_autocorrelation",
    "random_phase_points",
]

ENERGY_DRIFT_TOL = 1.0e-6


@dataclass(frozen=True)
class StandardMapParams:
    kick: float
    tau: float = 1.0


def standard_map_step(x: np.ndarray, kick: float, tau: float = 1.0) -> np.ndarray:
    """One kicked-rotor map iteration: p' = p + K sin q, q' = q + tau p' (mod 2π)."""
    q, p = float(x[0]), float(x[1])
    p = (p + kick * np.sin(q)) % TWO_PI
    q = (q + tau * p) % TWO_PI
    return np.array([q, p])


def coupled_rotor_map_step(x: np.ndarray, params: RotorParams) -> np.ndarray:
    """One iteration of the coupled kicked-rotor map; kick impulses are the
    exact gradient of K1 cos q1 + K2 cos q2 + c sin q1 sin q2."""
    q1, p1, q2, p2 = (float(v) for v in x)
    tau, c = params.kick_period, params.coupling
    p1 = (p1 + tau * (params.kick1 * np.sin(q1) - c * np.cos(q1) * np.sin(q2))) % TWO_PI
    p2 = (p2 + tau * (params.kick2 * np.sin(q2) - c * np.cos(q2) * np.sin(q1))) % TWO_PI
    q1 = (q1 + tau * p1) % TWO_PI
    q2 = (q2 + tau * p2) % TWO_PI
    return np.array([q1, p1, q2, p2])


def standard_map_trajectory(x0: np.ndarray, kick: float, tau: float,
                            steps: int) -> np.ndarray:
    """Orbit of the standard map, shape (steps+1, 2)."""
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    return _kernels.standard_map_orbit(float(x0[0]), float(x0[1]),
                                       float(kick), float(tau), int(steps))


def coupled_rotor_trajectory(x0: np.ndarray, params: RotorParams,
                             steps: int) -> np.ndarray:
    """Orbit of the coupled rotor map, shape (steps+1, 4)."""
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    return _kernels.coupled_rotor_orbit(
        float(x0[0]), float(x0[1]), float(x0[2]), float(x0[3]),
        float(params.kick1), float(params.kick2),
        float(params.kick_period), float(params.coupling), int(steps))


def coupled_harper_energy(points: np.ndarray, params: CoupledHarperParams) -> np.ndarray:
    """Hamiltonian value at each phase point (rows q1, p1, q2, p2)."""
    pts = np.atleast_2d(points)
    sub = params.subsystem
    wq = TWO_PI / sub.position_period
    wp = TWO_PI / sub.momentum_period
    q1, p1, q2, p2 = pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]
    return (sub.gamma1 * (np.cos(wp * p1) + np.cos(wp * p2))
            + sub.gamma2 * (np.cos(wq * q1) + np.cos(wq * q2))
            + params.coupling * np.sin(wq * q1) * np.sin(wq * q2))


def coupled_harper_flow(x0: np.ndarray, params: CoupledHarperParams,
                        dt: float = 1.0e-2, steps: int = 1000,
                        check_energy: bool = True) -> np.ndarray:
    """Symplectic orbit of the coupled Harper flow, shape (steps+1, 4).

    Integration composes exact position-only/momentum-only sub-steps
    (4th-order symmetric composition, time-reversible). When check_energy
    is set, |H(t) - H(0)| is required to stay below
    1e-6 * |H(0)| * steps * dt^2.
    """
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    sub = params.subsystem
    traj = _kernels.harper_flow_orbit(
        float(x0[0]), float(x0[1]), float(x0[2]), float(x0[3]),
        float(sub.gamma1), float(sub.gamma2), float(params.coupling),
        float(sub.position_period), float(sub.momentum_period),
        float(dt), int(steps))
    if check_energy:
        energy = coupled_harper_energy(traj, params)
        drift = float(np.max(np.abs(energy - energy[0])))
        bound = ENERGY_DRIFT_TOL * abs(energy[0]) * steps * dt * dt
        if drift > bound:
            raise IntegratorError(
                f"energy drift {drift:.3e} exceeds bound {bound:.3e} "
                f"(|H0|={abs(energy[0]):.3e}, steps={steps}, dt={dt})"
            )
    return traj


@dataclass(frozen=True)
class SectionPoints:
    """Poincaré section data: (q1, p1) rows and the interpolated crossing times."""

    points: np.ndarray
    times: np.ndarray


def poincare_section(traj: np.ndarray, dt: float, plane_value: float = 0.0,
                     position_period: float = TWO_PI,
                     momentum_period: float = TWO_PI) -> SectionPoints:
    """Section of a (steps+1, 4) trajectory at q2 = plane_value, positive
    crossings only, with linear interpolation between samples and
    wraparound-aware differencing."""
    traj = np.asarray(traj)
    if traj.ndim != 2 or traj.shape[1] != 4:
        raise ValidationError(f"trajectory must have shape (n, 4), got {traj.shape}")
    half = 0.5 * position_period
    s = ((traj[:, 2] - plane_value + half) % position_period) - half
    s0, s1 = s[:-1], s[1:]
    ds = s1 - s0
    hits = (s0 < 0.0) & (s1 >= 0.0) & (ds < half) & (ds > 0.0)
    idx = np.nonzero(hits)[0]
    if idx.size == 0:
        return SectionPoints(points=np.empty((0, 2)), times=np.empty(0))
    frac = -s0[idx] / ds[idx]

    def interp(col: np.ndarray, period: float) -> np.ndarray:
        a = col[idx]
        d = ((col[idx + 1] - a + 0.5 * period) % period) - 0.5 * period
        return (a + frac * d) % period

    q1 = interp(traj[:, 0], position_period)
    p1 = interp(traj[:, 1], momentum_period)
    times = (idx + frac) * dt
    return SectionPoints(points=np.column_stack([q1, p1]), times=times)


def lyapunov_largest(system: str, x0: np.ndarray, params, steps: int,
                     dt: float = 1.0e-2, delta0: float = 1.0e-8) -> float:
    """Largest Lyapunov exponent by twin-trajectory renormalization.

    system selects the dynamics: 'standard-map' (params: StandardMapParams,
    exponent per iteration), 'coupled-rotors' (params: RotorParams, per
    iteration), or 'coupled-harper' (params: CoupledHarperParams, per unit
    time; dt is the integrator step).
    """
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    if system == "standard-map":
        return float(_kernels.benettin_standard_map(
            float(x0[0]), float(x0[1]), float(params.kick), float(params.tau),
            int(steps), float(delta0)))
    if system == "coupled-rotors":
        return float(_kernels.benettin_coupled_rotor(
            float(x0[0]), float(x0[1]), float(x0[2]), float(x0[3]),
            float(params.kick1), float(params.kick2), float(params.kick_period),
            float(params.coupling), int(steps), float(delta0)))
    if system == "coupled-harper":
        sub = params.subsystem
        return float(_kernels.benettin_harper_flow(
            float(x0[0]), float(x0[1]), float(x0[2]), float(x0[3]),
            float(sub.gamma1), float(sub.gamma2), float(params.coupling),
            float(sub.position_period), float(sub.momentum_period),
            float(dt), int(steps), float(delta0)))
    raise ValidationError(f"unknown system {system!r}")


def classical_observable(traj: np.ndarray, name: str = "cos_q1") -> np.ndarray:
    """Scalar observable series along a trajectory; 'cos_q1' is the default
    used for classical autocorrelation."""
    traj = np.atleast_2d(traj)
    if name == "cos_q1":
        return np.cos(traj[:, 0])
    if name == "cos_q2":
        if traj.shape[1] < 3:
            raise ValidationError("trajectory has no second rotor")
        return np.cos(traj[:, 2])
    if name == "p1":
        return traj[:, 1].copy()
    raise ValidationError(f"unknown observable {name!r}")


def classical_autocorrelation(traj: np.ndarray, max_lag: int,
                              observable: str = "cos_q1"):
    """Autocorrelation of a coordinate function sampled along a trajectory."""
    from .diagnostics import series_autocorrelation

    return series_autocorrelation(classical_observable(traj, observable), max_lag)


def random_phase_points(count: int, seed: int,
                        periods=(TWO_PI, TWO_PI, TWO_PI, TWO_PI)) -> np.ndarray:
    """Seeded uniform initial conditions, one row per point."""
    rng = np.random.default_rng(seed)
    periods = np.asarray(periods, dtype=float)
    return rng.uniform(0.0, 1.0, size=(count, periods.size)) * periods[None, :]

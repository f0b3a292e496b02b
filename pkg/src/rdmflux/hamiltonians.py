"""Model builders: random Hermitian ensembles, torus Harper Hamiltonians,
kicked-rotor Floquet operators, and spectrum/eigenvector hybrids.

All builders are bit-deterministic given identical parameters and seed.
Matrices are returned in the position-like basis described by each builder;
composite systems use the row-major index i = a * dim_b + b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .errors import CapacityError, ValidationError
from .linalg import DEFAULT_MAX_DIM, dft_unitary, eigh, tensor_product

__all__ = [
    "GoeParams",
    "TorusParams",
    "RotorParams",
    "CoupledHarperParams",
    "build_goe",
    "build_harper",
    "build_coupled_harper",
    "build_floquet_rotor",
    "build_floquet_coupled_rotors",
    "build_floquet_coupled_rotors_continuous",
    "build_rotor_momentum_array",
    "hybrid_hamiltonian",
    "coherent_state",
    "momentum_values",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GoeParams:
    """Gaussian orthogonal ensemble draw: off-diagonals N(0, sigma^2),
    diagonals N(0, 2*sigma^2). sigma=None means 1/sqrt(dim), which keeps
    the spectrum support O(1)."""

    dim: int
    seed: int
    sigma: float | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValidationError(f"GOE dimension must be >= 2, got {self.dim}")
        if self.sigma is not None and self.sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")

    @property
    def sigma_value(self) -> float:
        return 1.0 / math.sqrt(self.dim) if self.sigma is None else self.sigma


@dataclass(frozen=True)
class TorusParams:
    """Torus-quantized Harper system with num_states states on a phase-space
    cell of momentum period x position period; hbar follows from the cell
    area, hbar = P*Q / (2*pi*N)."""

    num_states: int
    gamma1: float = 1.0
    gamma2: float = 1.0
    momentum_period: float = TWO_PI
    position_period: float = TWO_PI

    def __post_init__(self):
        if self.num_states < 2:
            raise ValidationError(f"num_states must be >= 2, got {self.num_states}")
        if self.momentum_period <= 0 or self.position_period <= 0:
            raise ValidationError("phase-space periods must be positive")

    @property
    def hbar(self) -> float:
        return self.momentum_period * self.position_period / (TWO_PI * self.num_states)


@dataclass(frozen=True)
class RotorParams:
    """Pair of kicked rotors on num_states momentum states each, kicked with
    strengths kick1/kick2 every kick_period, coupled through a
    coupling*sin(q1)*sin(q2) term applied inside the kick. hbar=None defaults
    to 2*pi/num_states so the symmetric momentum window spans one 2*pi cell."""

    num_states: int
    kick1: float
    kick2: float
    kick_period: float = 1.0
    coupling: float = 0.0
    hbar: float | None = None

    def __post_init__(self):
        if self.num_states < 2:
            raise ValidationError(f"num_states must be >= 2, got {self.num_states}")
        if self.kick_period <= 0:
            raise ValidationError(f"kick_period must be positive, got {self.kick_period}")
        if self.hbar is not None and self.hbar <= 0:
            raise ValidationError(f"hbar must be positive, got {self.hbar}")

    @property
    def hbar_value(self) -> float:
        return TWO_PI / self.num_states if self.hbar is None else self.hbar


@dataclass(frozen=True)
class CoupledHarperParams:
    """Two identical Harper subsystems with a coupling*sin(q1)*sin(q2) term."""

    subsystem: TorusParams
    coupling: float = 0.0


def build_goe(params: GoeParams) -> np.ndarray:
    """Real symmetric GOE draw, returned complex with exactly zero imaginary part."""
    rng = np.random.default_rng(params.seed)
    n = params.dim
    s = params.sigma_value
    H = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    H[iu] = rng.normal(0.0, s, size=iu[0].size)
    H += H.T
    H[np.diag_indices(n)] = rng.normal(0.0, math.sqrt(2.0) * s, size=n)
    return H.astype(complex)


def _position_phases(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def build_harper(params: TorusParams) -> np.ndarray:
    """Harper Hamiltonian in the position basis:
    gamma1 * F† diag(cos(2πk/N)) F + gamma2 * diag(cos(2πj/N))."""
    n = params.num_states
    F = dft_unitary(n)
    phase = _position_phases(n)
    kinetic = params.gamma1 * (F.conj().T @ (np.cos(phase)[:, None] * F))
    H = kinetic + np.diag(params.gamma2 * np.cos(phase))
    return 0.5 * (H + H.conj().T)


def build_coupled_harper(params: CoupledHarperParams,
                         max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """H1 ⊗ I + I ⊗ H2 + coupling * S ⊗ S with S = diag(sin(2πj/N))."""
    sub = params.subsystem
    H1 = build_harper(sub)
    S = np.diag(np.sin(_position_phases(sub.num_states))).astype(complex)
    eye = np.eye(sub.num_states, dtype=complex)
    H = tensor_product(H1, eye, max_dim=max_dim)
    H += tensor_product(eye, H1, max_dim=max_dim)
    H += params.coupling * tensor_product(S, S, max_dim=max_dim)
    return H


def momentum_values(num_states: int, hbar: float) -> np.ndarray:
    """Physical momentum assigned to DFT row k: the symmetric truncation
    window hbar*(k - floor(N/2)), a monotone ladder centered at zero."""
    return hbar * (np.arange(num_states) - num_states // 2)


def build_floquet_rotor(num_states: int, kick: float, kick_period: float = 1.0,
                        hbar: float | None = None) -> np.ndarray:
    """Single kicked rotor one-period operator F† D_kin F D_kick in the
    position basis."""
    hb = TWO_PI / num_states if hbar is None else hbar
    q = _position_phases(num_states)
    d_kick = np.exp(-1j * kick * np.cos(q) / hb)
    p = momentum_values(num_states, hb)
    d_kin = np.exp(-1j * kick_period * p * p / (2.0 * hb))
    F = dft_unitary(num_states)
    U = F.conj().T @ (d_kin[:, None] * F)
    return U * d_kick[None, :]


def build_floquet_coupled_rotors(params: RotorParams,
                                 max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """One-period operator of the coupled kicked rotor pair,
    (F⊗F)† D_kin (F⊗F) D_kick, with the coupling applied inside the kick:
    D_kick = exp(-i[K1 cos q1 + K2 cos q2 + c sin q1 sin q2]/hbar)."""
    n = params.num_states
    dim = n * n
    if dim > max_dim:
        raise CapacityError(f"composite dimension {dim} exceeds cap {max_dim}")
    hb = params.hbar_value
    q = _position_phases(n)
    q1 = np.repeat(q, n)
    q2 = np.tile(q, n)
    v_kick = (params.kick1 * np.cos(q1) + params.kick2 * np.cos(q2)
              + params.coupling * np.sin(q1) * np.sin(q2))
    d_kick = np.exp(-1j * v_kick / hb)
    p = momentum_values(n, hb)
    p1 = np.repeat(p, n)
    p2 = np.tile(p, n)
    d_kin = np.exp(-1j * params.kick_period * (p1 * p1 + p2 * p2) / (2.0 * hb))
    F = dft_unitary(n)
    F2 = np.kron(F, F)
    U = F2.conj().T @ (d_kin[:, None] * F2)
    return U * d_kick[None, :]


def build_floquet_coupled_rotors_continuous(params: RotorParams,
                                            max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """One-period operator of the rotor pair with the coupling acting
    continuously between kicks instead of inside them:
    U = exp(-i * tau * (p1²/2 + p2²/2 + c sin q1 sin q2)/hbar) D_kick,
    D_kick = exp(-i[K1 cos q1 + K2 cos q2]/hbar), built by dense
    diagonalization on the joint position grid.

    The split form hides the coupling from |U| (the modulus of any
    kick-times-drift product depends only on the index difference); this
    variant is the one whose matrix-element correlations see the coupling.
    """
    n = params.num_states
    dim = n * n
    if dim > max_dim:
        raise CapacityError(f"composite dimension {dim} exceeds cap {max_dim}")
    hb = params.hbar_value
    q = _position_phases(n)
    q1 = np.repeat(q, n)
    q2 = np.tile(q, n)
    p = momentum_values(n, hb)
    p1 = np.repeat(p, n)
    p2 = np.tile(p, n)
    F2 = np.kron(dft_unitary(n), dft_unitary(n))
    H_cont = F2.conj().T @ ((0.5 * (p1 * p1 + p2 * p2))[:, None] * F2)
    H_cont += np.diag(params.coupling * np.sin(q1) * np.sin(q2))
    spec = eigh(0.5 * (H_cont + H_cont.conj().T))
    drift_phase = np.exp(-1j * params.kick_period * spec.eigenvalues / hb)
    U = (spec.eigenvectors * drift_phase) @ spec.eigenvectors.conj().T
    d_kick = np.exp(-1j * (params.kick1 * np.cos(q1) + params.kick2 * np.cos(q2)) / hb)
    return U * d_kick[None, :]


def _planar_sin(n: int) -> np.ndarray:
    """<k|sin q|l> on the truncated planar momentum ladder: tridiagonal
    (delta_{k,l+1} - delta_{k,l-1})/(2i), no wraparound."""
    S = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    S[idx + 1, idx] = 1.0 / 2.0j
    S[idx, idx + 1] = -1.0 / 2.0j
    return S


def _planar_kick(n: int, kick: float, hbar: float) -> np.ndarray:
    """<k|exp(-i K cos q / hbar)|l> on the planar ladder:
    (-i)^(k-l) J_(k-l)(K/hbar), Bessel coefficients without wraparound."""
    d = np.subtract.outer(np.arange(n), np.arange(n))
    quarter = np.array([1.0, -1.0j, -1.0, 1.0j])
    return quarter[d % 4] * scipy.special.jv(d, kick / hbar)


def build_rotor_momentum_array(params: RotorParams,
                               max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """One-step array of the coupled rotors on the truncated planar momentum
    lattice (momentum-basis rows/columns, composite index k1*N + k2).

    Kinetic and coupling terms are exponentiated on the truncated ladder,
    then multiplied by the Bessel-coefficient kick factors. Truncation loses
    edge flux, so the array is intentionally NOT unitary; it is the object
    whose element-modulus correlations distinguish chaotic from regular
    parameter regimes, not an evolution operator.
    """
    n = params.num_states
    dim = n * n
    if dim > max_dim:
        raise CapacityError(f"composite dimension {dim} exceeds cap {max_dim}")
    hb = params.hbar_value
    p = momentum_values(n, hb)
    kinetic = 0.5 * (np.repeat(p, n) ** 2 + np.tile(p, n) ** 2)
    S = _planar_sin(n)
    H = np.diag(kinetic) + params.coupling * np.kron(S, S)
    spec = eigh(0.5 * (H + H.conj().T))
    drift_phase = np.exp(-1j * params.kick_period * spec.eigenvalues / hb)
    drift = (spec.eigenvectors * drift_phase) @ spec.eigenvectors.conj().T
    kick = np.kron(_planar_kick(n, params.kick1, hb),
                   _planar_kick(n, params.kick2, hb))
    return drift @ kick


def hybrid_hamiltonian(eigenvalue_source: np.ndarray,
                       eigenvector_source: np.ndarray) -> np.ndarray:
    """Hermitian operator with the spectrum of one matrix and the eigenbasis
    of another: H = V_b diag(E_a) V_b†."""
    sa = eigh(eigenvalue_source)
    sb = eigh(eigenvector_source)
    if sa.dim != sb.dim:
        raise ValidationError(
            f"source dimensions differ: {sa.dim} vs {sb.dim}"
        )
    H = (sb.eigenvectors * sa.eigenvalues[None, :]) @ sb.eigenvectors.conj().T
    return 0.5 * (H + H.conj().T)


def coherent_state(params: TorusParams, q0: float, p0: float,
                   scale: float = 1.0, wraps: int = 4) -> np.ndarray:
    """Normalized Gaussian wave packet on the position grid, periodized over
    the torus, centered at (q0, p0); amplitude width
    sigma_q = sqrt(hbar * Q / (2 * P)) * scale."""
    if scale <= 0:
        raise ValidationError(f"scale must be positive, got {scale}")
    n = params.num_states
    Q = params.position_period
    hb = params.hbar
    sigma_q = math.sqrt(hb * Q / (2.0 * params.momentum_period)) * scale
    grid = Q * np.arange(n) / n
    psi = np.zeros(n, dtype=complex)
    for w in range(-wraps, wraps + 1):
        q = grid + w * Q
        psi += np.exp(-((q - q0) ** 2) / (2.0 * sigma_q ** 2) + 1j * p0 * q / hb)
    norm = np.linalg.norm(psi)
    if norm < 1.0e-300:
        raise ValidationError("coherent state underflowed to zero on this grid")
    return psi / norm

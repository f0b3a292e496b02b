"""Dense linear algebra for bipartite quantum systems.

Composite basis convention used everywhere in this package: a bipartite
system with subsystem dimensions (dim_a, dim_b) is indexed row-major,
i = a * dim_b + b. Entropies use the natural logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError

__all__ = [
    "BipartiteDims",
    "Spectrum",
    "validate_hermitian",
    "validate_unitary",
    "validate_density_matrix",
    "validate_state",
    "eigh",
    "tensor_product",
    "partial_trace",
    "reduced_from_state",
    "purity",
    "von_neumann_entropy",
    "linear_entropy",
    "random_pure_product",
    "dft_unitary",
    "save_matrix_txt",
    "load_matrix_txt",
]

DEFAULT_MAX_DIM = 16384

HERMITICITY_TOL = 1.0e-12
UNITARITY_TOL = 1.0e-10
TRACE_TOL = 1.0e-10
NORM_TOL = 1.0e-12
EIGVAL_FLOOR = -1.0e-10


@dataclass(frozen=True)
class BipartiteDims:
    """Subsystem dimensions of a bipartite split; composite index a*dim_b + b."""

    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise ValidationError(
                f"subsystem dimensions must be positive, got ({self.dim_a}, {self.dim_b})"
            )

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian operator.

    eigenvalues are ascending; eigenvectors[:, k] is the unit eigenvector
    for eigenvalues[k].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def _as_square(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def validate_hermitian(H: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Check H == H† entrywise within tol; returns H, raises naming the worst entry."""
    H = _as_square(H, "operator")
    dev = np.abs(H - H.conj().T)
    worst = np.unravel_index(np.argmax(dev), dev.shape)
    if dev[worst] > tol:
        raise ValidationError(
            f"matrix is not Hermitian: |H[{worst[0]},{worst[1]}] - conj(H[{worst[1]},{worst[0]}])| "
            f"= {dev[worst]:.3e} exceeds {tol:.1e}"
        )
    return H


def validate_unitary(U: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    """Check ||U†U - I||_F <= tol * dim; returns U."""
    U = _as_square(U, "operator")
    dim = U.shape[0]
    residual = np.linalg.norm(U.conj().T @ U - np.eye(dim))
    if residual > tol * dim:
        raise ValidationError(
            f"matrix is not unitary: ||U†U - I||_F = {residual:.3e} exceeds {tol:.1e} * {dim}"
        )
    return U


def validate_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Check hermiticity, unit trace, and positivity (eigenvalues >= -1e-10)."""
    rho = validate_hermitian(rho)
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"density matrix trace is {tr:.15g}, not 1 within {TRACE_TOL:.1e}")
    evals = np.linalg.eigvalsh(rho)
    if evals[0] < EIGVAL_FLOOR:
        raise ValidationError(
            f"density matrix has negative eigenvalue {evals[0]:.3e} below {EIGVAL_FLOOR:.1e}"
        )
    return rho


def validate_state(psi: np.ndarray) -> np.ndarray:
    """Check psi is a vector with unit norm within 1e-12."""
    psi = np.asarray(psi)
    if psi.ndim != 1:
        raise ValidationError(f"state must be a 1-d vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"state norm is {norm:.15g}, not 1 within {NORM_TOL:.1e}")
    return psi


def eigh(H: np.ndarray) -> Spectrum:
    """Eigendecomposition of a Hermitian operator (ascending eigenvalues)."""
    H = validate_hermitian(H)
    evals, evecs = np.linalg.eigh(H)
    return Spectrum(eigenvalues=evals, eigenvectors=evecs)


def tensor_product(A: np.ndarray, B: np.ndarray, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Kronecker product with the composite-index convention i = a*dim_b + b."""
    A = np.asarray(A)
    B = np.asarray(B)
    out_rows = A.shape[0] * B.shape[0]
    if out_rows > max_dim:
        raise CapacityError(
            f"tensor product dimension {out_rows} exceeds cap {max_dim}"
        )
    return np.kron(A, B)


def partial_trace(rho: np.ndarray, dims: BipartiteDims, keep: str = "A") -> np.ndarray:
    """Reduced density matrix of one subsystem.

    Parameters
    ----------
    rho : composite density matrix, shape (dim_a*dim_b, dim_a*dim_b)
    dims : bipartite split
    keep : "A" traces out B, (rho_A)_{mn} = sum_l rho[(m,l),(n,l)];
           "B" traces out A, (rho_B)_{kl} = sum_m rho[(m,k),(m,l)]
    """
    rho = _as_square(rho, "density matrix")
    if rho.shape[0] != dims.dim:
        raise ValidationError(
            f"density matrix dimension {rho.shape[0]} does not match "
            f"{dims.dim_a}x{dims.dim_b} split"
        )
    r4 = rho.reshape(dims.dim_a, dims.dim_b, dims.dim_a, dims.dim_b)
    if keep == "A":
        return np.einsum("mlnl->mn", r4)
    if keep == "B":
        return np.einsum("mkml->kl", r4)
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")


def reduced_from_state(psi: np.ndarray, dims: BipartiteDims, keep: str = "A") -> np.ndarray:
    """Reduced density matrix of a pure state via the reshaped amplitude matrix.

    With M = psi reshaped to (dim_a, dim_b): rho_A = M M†, rho_B = Mᵀ M*.
    Equivalent to partial_trace(outer(psi, psi†)) but without the dim² outer.
    """
    psi = np.asarray(psi)
    if psi.shape != (dims.dim,):
        raise ValidationError(
            f"state length {psi.shape} does not match {dims.dim_a}x{dims.dim_b} split"
        )
    M = psi.reshape(dims.dim_a, dims.dim_b)
    if keep == "A":
        return M @ M.conj().T
    if keep == "B":
        return M.T @ M.conj()
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")


def purity(rho: np.ndarray) -> float:
    """Tr rho², real part."""
    rho = _as_square(rho, "density matrix")
    return float(np.einsum("ij,ji->", rho, rho).real)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-Tr(rho ln rho); eigenvalues in [-1e-10, 0) are clamped to 0."""
    rho = _as_square(rho, "density matrix")
    evals = np.linalg.eigvalsh(rho)
    if evals[0] < EIGVAL_FLOOR:
        raise ValidationError(
            f"entropy undefined: eigenvalue {evals[0]:.3e} below {EIGVAL_FLOOR:.1e}"
        )
    evals = np.clip(evals, 0.0, None)
    pos = evals[evals > 1.0e-12]
    return float(-np.sum(pos * np.log(pos)))


def linear_entropy(rho: np.ndarray) -> float:
    """1 - Tr rho²."""
    return 1.0 - purity(rho)


def random_pure_product(dims: BipartiteDims, seed: int) -> np.ndarray:
    """Seeded random product state: independent complex Gaussian vectors on each
    factor, normalized, then combined; Schmidt rank 1 by construction."""
    rng = np.random.default_rng(seed)
    parts = []
    for d in (dims.dim_a, dims.dim_b):
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        parts.append(v / np.linalg.norm(v))
    return np.kron(parts[0], parts[1])


def dft_unitary(n: int) -> np.ndarray:
    """Unitary DFT matrix F[k, j] = exp(-2πi k j / n) / sqrt(n)."""
    if n < 1:
        raise ValidationError(f"DFT dimension must be positive, got {n}")
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def save_matrix_txt(path, M: np.ndarray) -> None:
    """Write a complex matrix as text: 'rows cols' header, then one line per row
    of comma-joined 're,im' pairs at %.17g (locale-independent)."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]}\n")
        for row in M:
            cells = ["%.17g,%.17g" % (z.real, z.imag) for z in row]
            fh.write(" ".join(cells) + "\n")


def load_matrix_txt(path) -> np.ndarray:
    """Inverse of save_matrix_txt."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        rows, cols = int(header[0]), int(header[1])
        M = np.empty((rows, cols), dtype=complex)
        for i in range(rows):
            cells = fh.readline().split()
            if len(cells) != cols:
                raise ValidationError(f"row {i} has {len(cells)} entries, expected {cols}")
            for j, cell in enumerate(cells):
                re, im = cell.split(",")
                M[i, j] = complex(float(re), float(im))
    return M

"""Fluctuation diagnostics: matrix-element and time-series autocorrelation,
correlation-length fits, power spectra with participation ratios, energy
interval statistics, and the spectral reconstruction of Tr rho_R^2(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    DegenerateSeriesError,
    FitFailureError,
    ValidationError,
)
from .linalg import BipartiteDims, Spectrum, validate_density_matrix

__all__ = [
    "AutocorrResult",
    "PowerSpectrum",
    "IntervalHistogram",
    "matrix_autocorrelation",
    "series_autocorrelation",
    "fit_correlation_length",
    "l_c_for_ordering",
    "power_spectrum",
    "spectral_bandwidth",
    "energy_interval_distribution",
    "level_spacings",
    "nnlsd",
    "effective_support_width",
    "trace_rho_squared_spectral",
]

CORR_FLOOR = 0.05
VARIANCE_FLOOR = 1.0e-24
TRACE_SQ_IMAG_TOL = 1.0e-9
TRACE_SQ_MAX_DIM = 64


@dataclass(frozen=True)
class AutocorrResult:
    """Normalized autocorrelation (values[0] == 1) with an attached
    correlation-length fit.

    lags are in sample units; dt converts them to time when known. fit_l_c is
    None when the fit failed, with the reason in fit_error. Series
    autocorrelations are bounded by 1 in magnitude; matrix autocorrelations
    use per-count normalization and can exceed 1 for structured matrices.
    """

    lags: np.ndarray
    values: np.ndarray
    dt: float | None = None
    fit_l_c: float | None = None
    fit_window: tuple | None = None
    fit_error: str | None = None


@dataclass(frozen=True)
class PowerSpectrum:
    """Normalized power over non-negative frequencies excluding DC
    (sum(power) == 1); participation_ratio = 1 / sum(power^2)."""

    frequencies: np.ndarray
    power: np.ndarray
    participation_ratio: float


@dataclass(frozen=True)
class IntervalHistogram:
    """Histogram of spectral intervals; counts[k] are samples in
    [bin_edges[k], bin_edges[k+1]); total_count includes samples outside
    the binned range (only possible for the clipped spacing histogram)."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total_count: int


def _fit_first_local_min(c: np.ndarray) -> float | None:
    for k in range(1, c.shape[0] - 1):
        if c[k] < c[k - 1] and c[k] <= c[k + 1]:
            return float(c[k])
    return None


def fit_correlation_length(values: np.ndarray) -> tuple[float, tuple]:
    """Correlation length from the initial fall of a normalized
    autocorrelation.

    The fit window [0, k_stop) ends at the first lag where C(k) drops to
    max(0.05, value of the first local minimum) or below zero; a least-squares
    line through ln C(k) gives l_c = -1/slope. When the fall completes within
    two lags (window shorter than 3 points) the two-point exponential through
    C(0)=1 and C(1) is used instead, and C(1) <= 0 reports l_c = 0
    (sub-lag decorrelation). Non-decaying autocorrelations raise
    FitFailureError with no_decay set.
    """
    c = np.asarray(values, dtype=float)
    if c.ndim != 1 or c.shape[0] < 2:
        raise FitFailureError("autocorrelation has fewer than 2 lags")
    local_min = _fit_first_local_min(c)
    threshold = CORR_FLOOR if local_min is None else max(CORR_FLOOR, local_min)
    k_stop = None
    for k in range(1, c.shape[0]):
        if c[k] <= threshold or c[k] <= 0.0:
            k_stop = k
            break
    window = c.shape[0] if k_stop is None else k_stop
    if window >= 3:
        ks = np.arange(window, dtype=float)
        y = np.log(c[:window])
        slope = float(np.polyfit(ks, y, 1)[0])
        if slope >= 0.0:
            raise FitFailureError(
                "autocorrelation does not decay over the fit window", no_decay=True)
        return -1.0 / slope, (0, window)
    if k_stop is not None:
        c1 = float(c[1])
        if c1 > 0.0:
            return -1.0 / math.log(c1), (0, 2)
        return 0.0, (0, 2)
    raise FitFailureError("fit window has fewer than 3 points")


def _attach_fit(lags, values, dt):
    try:
        l_c, win = fit_correlation_length(values)
        return AutocorrResult(lags=lags, values=values, dt=dt,
                              fit_l_c=l_c, fit_window=win)
    except FitFailureError as exc:
        return AutocorrResult(lags=lags, values=values, dt=dt,
                              fit_l_c=None, fit_window=None, fit_error=str(exc))


def l_c_for_ordering(result: AutocorrResult) -> float:
    """Correlation length for ordering comparisons: a fit that failed because
    the autocorrelation never decays counts as infinite; any other failure
    raises."""
    if result.fit_l_c is not None:
        return result.fit_l_c
    if result.fit_error and "does not decay" in result.fit_error:
        return math.inf
    raise FitFailureError(result.fit_error or "no fit available")


def matrix_autocorrelation(M: np.ndarray, max_lag: int,
                           use_modulus: bool = False) -> AutocorrResult:
    """Diagonal-shift autocorrelation of matrix elements.

    A(m) = sum_{i,j} x[i,j] * conj(x[i+m, j+m]) over indices where both
    factors exist, x = |M| when use_modulus else M; each lag is divided by
    its term count (N-m)^2 and the series is normalized by the lag-0 value.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {M.shape}")
    n = M.shape[0]
    if not 1 <= max_lag <= n - 1:
        raise ValidationError(f"max_lag must be in [1, {n - 1}], got {max_lag}")
    x = np.abs(M) if use_modulus else M
    vals = np.empty(max_lag + 1)
    for m in range(max_lag + 1):
        top = x[: n - m, : n - m]
        shifted = x[m:, m:]
        acc = np.sum(top * np.conj(shifted))
        vals[m] = acc.real / ((n - m) * (n - m))
    if vals[0] <= 0.0:
        raise ValidationError("zero matrix has no autocorrelation")
    vals /= vals[0]
    return _attach_fit(np.arange(max_lag + 1), vals, None)


def series_autocorrelation(series, max_lag: int) -> AutocorrResult:
    """Non-circular autocorrelation of a scalar series after mean removal:
    C(k) = sum_t x_t x_{t+k} / sum_t x_t^2. Requires length >= 2*max_lag and
    non-degenerate variance."""
    dt = getattr(series, "dt", None)
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if values.ndim != 1:
        raise ValidationError(f"series must be 1-d, got shape {values.shape}")
    n = values.shape[0]
    if max_lag < 1 or n < 2 * max_lag:
        raise ValidationError(
            f"series length {n} is shorter than 2*max_lag = {2 * max_lag}")
    x = values - values.mean()
    denom = float(np.dot(x, x))
    if denom / n <= VARIANCE_FLOOR:
        raise DegenerateSeriesError(
            f"series variance {denom / n:.3e} is below {VARIANCE_FLOOR:.1e}")
    corr = np.correlate(x, x, mode="full")[n - 1 : n + max_lag]
    vals = corr / denom
    return _attach_fit(np.arange(max_lag + 1), vals, dt)


def power_spectrum(series, dt: float | None = None) -> PowerSpectrum:
    """Normalized power spectrum of a mean-subtracted series over positive
    frequencies (DC excluded), with its participation ratio."""
    if dt is None:
        dt = getattr(series, "dt", 1.0) or 1.0
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if values.ndim != 1 or values.shape[0] < 4:
        raise ValidationError("series must be 1-d with at least 4 samples")
    x = values - values.mean()
    amp = np.fft.rfft(x)
    power = np.abs(amp[1:]) ** 2
    total = float(power.sum())
    if total <= 0.0:
        raise DegenerateSeriesError("series has no spectral weight off DC")
    power /= total
    freqs = np.fft.rfftfreq(values.shape[0], d=dt)[1:]
    pr = 1.0 / float(np.sum(power * power))
    return PowerSpectrum(frequencies=freqs, power=power, participation_ratio=pr)


def spectral_bandwidth(spectrum: PowerSpectrum, fraction: float = 0.9) -> float:
    """Broadening of a power spectrum: the lowest frequency below which the
    cumulative power reaches `fraction` of the total. Robust against leakage
    skirts, unlike support counting; insensitive to comb density, unlike the
    participation ratio."""
    if not 0.0 < fraction <= 1.0:
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    cum = np.cumsum(spectrum.power)
    idx = int(np.searchsorted(cum, fraction * cum[-1]))
    return float(spectrum.frequencies[min(idx, spectrum.frequencies.shape[0] - 1)])


def energy_interval_distribution(spectrum: Spectrum, hbar: float,
                                 bins: int = 128) -> IntervalHistogram:
    """Histogram of all pairwise transition frequencies (E_a - E_b)/hbar,
    a > b, over [0, full span]."""
    if hbar <= 0:
        raise ValidationError(f"hbar must be positive, got {hbar}")
    E = np.asarray(spectrum.eigenvalues, dtype=float)
    n = E.shape[0]
    if n < 2:
        raise ValidationError("need at least two levels")
    span = (E[-1] - E[0]) / hbar
    if span <= 0.0:
        raise ValidationError("spectrum is fully degenerate")
    ia, ib = np.triu_indices(n, k=1)
    omega = (E[ib] - E[ia]) / hbar  # upper triangle of E_b - E_a with b > a
    counts, edges = np.histogram(omega, bins=bins, range=(0.0, span))
    return IntervalHistogram(bin_edges=edges, counts=counts,
                             total_count=int(omega.size))


def level_spacings(spectrum: Spectrum) -> np.ndarray:
    """Nearest-neighbor spacings normalized to unit mean."""
    E = np.asarray(spectrum.eigenvalues, dtype=float)
    if E.shape[0] < 3:
        raise ValidationError("need at least three levels for spacings")
    s = np.diff(E)
    mean = float(s.mean())
    scale = max(float(np.max(np.abs(E))), 1.0e-300)
    if mean < 1.0e-14 * scale:
        raise ValidationError(
            f"mean spacing {mean:.3e} is degenerate relative to |E|max {scale:.3e}")
    return s / mean


def nnlsd(spectrum: Spectrum, bins: int = 40) -> IntervalHistogram:
    """Nearest-neighbor level-spacing distribution, mean-normalized, binned
    over [0, 4]; spacings beyond 4 stay in total_count but out of the bins."""
    s = level_spacings(spectrum)
    counts, edges = np.histogram(s, bins=bins, range=(0.0, 4.0))
    return IntervalHistogram(bin_edges=edges, counts=counts, total_count=int(s.size))


def effective_support_width(hist: IntervalHistogram,
                            occupancy: float = 0.1) -> float:
    """Lebesgue measure of the bins carrying real weight: total width of bins
    whose count reaches `occupancy` times the uniform per-bin share."""
    widths = np.diff(hist.bin_edges)
    threshold = occupancy * hist.total_count / hist.counts.shape[0]
    return float(widths[hist.counts >= threshold].sum())


def trace_rho_squared_spectral(spectrum: Spectrum, rho0: np.ndarray,
                               dims: BipartiteDims, times: np.ndarray,
                               hbar: float, keep: str = "A",
                               max_dim: int = TRACE_SQ_MAX_DIM) -> np.ndarray:
    """Tr rho_R^2(t) reconstructed from the eigenbasis without evolving rho.

    Precomputes phi[a,b,m,n] = <E_a|rho0|E_b> * sum_l <E_b|n,l> <m,l|E_a>,
    then sums phases exp(-i omega_ab t) per time point (O(dim^2 * dimA^2)
    each). The imaginary residual of the trace must stay below 1e-9.
    """
    if hbar <= 0:
        raise ValidationError(f"hbar must be positive, got {hbar}")
    if spectrum.dim != dims.dim:
        raise ValidationError("spectrum and bipartition dimensions disagree")
    if spectrum.dim > max_dim:
        raise CapacityError(
            f"dimension {spectrum.dim} exceeds spectral-reconstruction cap {max_dim}")
    rho0 = validate_density_matrix(rho0)
    if rho0.shape[0] != dims.dim:
        raise ValidationError("density matrix does not match bipartition")
    V = spectrum.eigenvectors
    R = V.conj().T @ rho0 @ V
    G = V.reshape(dims.dim_a, dims.dim_b, spectrum.dim)
    if keep == "A":
        overlap = np.einsum("mla,nlb->abmn", G, G.conj())
    elif keep == "B":
        overlap = np.einsum("mka,mlb->abkl", G, G.conj())
    else:
        raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")
    phi = overlap * R[:, :, None, None]
    omega_phase = spectrum.eigenvalues / hbar
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(times.shape[0])
    for i, t in enumerate(times):
        p = np.exp(-1j * omega_phase * t)
        phase = p[:, None] * p.conj()[None, :]
        rho_r = np.einsum("ab,abmn->mn", phase, phi)
        val = complex(np.einsum("mn,nm->", rho_r, rho_r))
        if abs(val.imag) > TRACE_SQ_IMAG_TOL:
            raise ValidationError(
                f"imaginary residual {val.imag:.3e} exceeds {TRACE_SQ_IMAG_TOL:.1e} at t={t}")
        out[i] = val.real
    return out

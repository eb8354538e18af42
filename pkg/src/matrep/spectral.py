"""Spectra of projected operators and synthesised eigenfunctions."""

from dataclasses import dataclass

import numpy as np

from .basis import BasisSet, evaluate_all
from .errors import ContractViolationError, DegenerateInputError
from .jacobi import jacobi_eigh
from .operators import OperatorMatrix

__all__ = [
    "Spectrum",
    "SampledWave",
    "PeakMetrics",
    "eigen_symmetric",
    "synthesize",
    "peak_metrics",
]

MAX_EIGEN_SIZE = 1000

#: grid spacing above which peak metrics refuse to run
PEAK_GRID_LIMIT = 0.05


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with square-normalised coefficient vectors.

    ``vectors[k]`` holds the coefficients of the k-th eigenvector; the
    largest-magnitude component of each is positive, and degenerate clusters
    are ordered by the first significant component index, so output is
    deterministic.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.vectors.setflags(write=False)


@dataclass(frozen=True, eq=False)
class SampledWave:
    r: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        self.r.setflags(write=False)
        self.psi.setflags(write=False)


@dataclass(frozen=True)
class PeakMetrics:
    max_abs: float
    effective_range: float
    fwhm: float


def _fix_signs_and_order(eigenvalues: np.ndarray, columns: np.ndarray):
    """Apply the sign convention and a deterministic degenerate ordering."""
    n = eigenvalues.size
    vectors = columns.T.copy()
    for k in range(n):
        lead = np.argmax(np.abs(vectors[k]))
        if vectors[k, lead] < 0.0:
            vectors[k] = -vectors[k]

    # order degenerate clusters by the first significant component index
    scale = max(1.0, np.abs(eigenvalues).max(initial=0.0))
    order = np.arange(n)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(eigenvalues[stop] - eigenvalues[start]) <= 1e-12 * scale:
            stop += 1
        if stop - start > 1:
            def first_index(k):
                v = vectors[k]
                significant = np.abs(v) > 1e-12 * np.abs(v).max()
                return int(np.argmax(significant))

            cluster = sorted(range(start, stop), key=first_index)
            order[start:stop] = cluster
        start = stop
    return eigenvalues[order], vectors[order]


def eigen_symmetric(matrix) -> Spectrum:
    """Full spectrum of a symmetric operator matrix via cyclic Jacobi.

    Accepts an :class:`OperatorMatrix` or a plain symmetric ndarray.
    """
    entries = matrix.entries if isinstance(matrix, OperatorMatrix) else np.asarray(matrix, float)
    if entries.shape[0] > MAX_EIGEN_SIZE:
        raise ContractViolationError(f"matrix larger than {MAX_EIGEN_SIZE}")
    scale = max(1.0, np.abs(entries).max(initial=0.0))
    if np.abs(entries - entries.T).max(initial=0.0) > 1e-12 * scale:
        raise ContractViolationError("eigen_symmetric expects a symmetric matrix")
    eigenvalues, columns = jacobi_eigh(entries)
    eigenvalues, vectors = _fix_signs_and_order(eigenvalues, columns)
    return Spectrum(eigenvalues=eigenvalues, vectors=vectors)


def synthesize(basis: BasisSet, coeffs, grid) -> SampledWave:
    """Pointwise wave ``psi(r) = sum_i c_i chi_i(r)`` on the given grid."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size != basis.n:
        raise ValueError(f"expected {basis.n} coefficients, got {coeffs.size}")
    grid = np.asarray(grid, dtype=float)
    return SampledWave(r=grid.copy(), psi=coeffs @ evaluate_all(basis, grid))


def peak_metrics(wave: SampledWave) -> PeakMetrics:
    """Height, 1%-support range and FWHM of the principal peak of ``|psi|``."""
    r, psi = wave.r, wave.psi
    step = np.abs(np.diff(r)).max()
    if step > PEAK_GRID_LIMIT + 1e-12:
        raise ValueError(f"peak metrics need grid spacing <= {PEAK_GRID_LIMIT}")
    magnitude = np.abs(psi)
    max_abs = magnitude.max()
    if max_abs == 0.0:
        raise DegenerateInputError("wave is identically zero")

    supported = magnitude > 0.01 * max_abs
    effective_range = float(np.abs(r[supported]).max())

    peak = int(np.argmax(magnitude))
    half = max_abs / 2.0

    def crossing(direction):
        idx = peak
        while 0 <= idx + direction < r.size and magnitude[idx + direction] >= half:
            idx += direction
        nxt = idx + direction
        if nxt < 0 or nxt >= r.size:
            return r[idx]
        # linear interpolation between the last point above half and the first below
        frac = (magnitude[idx] - half) / (magnitude[idx] - magnitude[nxt])
        return r[idx] + frac * (r[nxt] - r[idx])

    fwhm = float(abs(crossing(+1) - crossing(-1)))
    return PeakMetrics(max_abs=float(max_abs), effective_range=effective_range, fwhm=fwhm)

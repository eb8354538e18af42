"""Coordinate-space kernels of projected operators and their diagnostics.

A truncated basis turns an operator ``O`` into the finite-rank kernel
``K(r, s) = sum_ij chi_i(r) <i|O|j> chi_j(s)``; with no operator the sum
``sum_i chi_i(r) chi_i(s)`` approximates the delta function.  This module
renders such kernels on grids, evaluates the compact two-term closed form
of the oscillator identity kernel (and its extensions to ``r^2`` and to the
full oscillator Hamiltonian), and computes crest/cut/weight diagnostics.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import (
    BasisSet,
    Family,
    dual_basis,
    evaluate_all,
    evaluate_raw_all,
    hermite_functions,
    integral_moments,
)
from .errors import OutOfRangeError, OutsideTrustRegionError
from .operators import OperatorKind, OperatorMatrix

__all__ = [
    "KernelKind",
    "KernelGrid",
    "CurveLabel",
    "CurveSeries",
    "default_axis",
    "render_kernel",
    "dual_identity_kernel",
    "christoffel_darboux",
    "r2_kernel_compact",
    "projected_oscillator_compact",
    "cut_weight",
    "crest_and_cuts",
    "crest_ratio",
]

#: points closer than this to the diagonal use the series (confluent) branch
CONFLUENT_THRESHOLD = 1e-6

#: trust-region crest floor below which crest ratios are refused
CREST_FLOOR = 1e-12


class KernelKind(Enum):
    IDENTITY = "identity"
    KINETIC = "kinetic"
    POSITION_SQUARED = "r2"
    POTENTIAL = "potential"
    SEPARABLE = "separable"
    GENERAL_IDENTITY = "general-identity"
    EFFECTIVE = "effective"


@dataclass(frozen=True, eq=False)
class KernelGrid:
    """Kernel samples ``values[i, j] = K(r_axis[i], s_axis[j])``."""

    r_axis: np.ndarray
    s_axis: np.ndarray
    values: np.ndarray
    kind: KernelKind

    def __post_init__(self):
        self.r_axis.setflags(write=False)
        self.s_axis.setflags(write=False)
        self.values.setflags(write=False)


class CurveLabel(Enum):
    CREST = "crest"
    CUT = "cut"
    CUT_WEIGHT = "cut-weight"
    KINETIC_WEIGHT = "kinetic-weight"
    CREST_RATIO = "crest-ratio"


@dataclass(frozen=True, eq=False)
class CurveSeries:
    x: np.ndarray
    y: np.ndarray
    label: CurveLabel
    s_position: float | None = None

    def __post_init__(self):
        self.x.setflags(write=False)
        self.y.setflags(write=False)


def default_axis(n: int) -> np.ndarray:
    """Grid covering the trust region ``|r| <~ 1.5 sqrt(n)`` plus margin,
    four points per unit length."""
    half = 1.5 * np.sqrt(n) + 2.0
    count = int(np.ceil(half / 0.25))
    return np.linspace(-0.25 * count, 0.25 * count, 2 * count + 1)


def _kind_for(basis: BasisSet, matrix: OperatorMatrix | None) -> KernelKind:
    if matrix is None:
        if basis.spec.family is Family.HARMONIC_OSCILLATOR:
            return KernelKind.IDENTITY
        return KernelKind.GENERAL_IDENTITY
    return {
        OperatorKind.KINETIC: KernelKind.KINETIC,
        OperatorKind.POSITION_SQUARED: KernelKind.POSITION_SQUARED,
        OperatorKind.LOCAL_POTENTIAL: KernelKind.POTENTIAL,
        OperatorKind.HAMILTONIAN: KernelKind.POTENTIAL,
        OperatorKind.CUSTOM: KernelKind.SEPARABLE,
    }[matrix.kind]


def render_kernel(
    basis: BasisSet,
    matrix: OperatorMatrix | None = None,
    r_axis=None,
    s_axis=None,
    kind: KernelKind | None = None,
) -> KernelGrid:
    """Sample the reconstructed kernel on a rectangular grid.

    With ``matrix=None`` the identity kernel ``sum_i chi_i(r) chi_i(s)`` is
    rendered; otherwise ``sum_ij chi_i(r) M_ij chi_j(s)``.  Axes default to
    :func:`default_axis`.
    """
    r_axis = default_axis(basis.n) if r_axis is None else np.asarray(r_axis, dtype=float)
    s_axis = r_axis if s_axis is None else np.asarray(s_axis, dtype=float)
    chi_r = evaluate_all(basis, r_axis)
    chi_s = chi_r if s_axis is r_axis else evaluate_all(basis, s_axis)
    if matrix is None:
        values = chi_r.T @ chi_s
    else:
        values = chi_r.T @ matrix.entries @ chi_s
    return KernelGrid(r_axis, s_axis, values, kind or _kind_for(basis, matrix))


def dual_identity_kernel(basis: BasisSet, r_axis=None, s_axis=None) -> KernelGrid:
    """Identity kernel assembled from raw/dual pairs ``sum_i phi_i(r) tau_i(s)``.

    Must reproduce :func:`render_kernel` of the orthonormalised family; kept
    as an independent cross-check of the orthonormalisation.
    """
    r_axis = default_axis(basis.n) if r_axis is None else np.asarray(r_axis, dtype=float)
    s_axis = r_axis if s_axis is None else np.asarray(s_axis, dtype=float)
    dual = dual_basis(basis.gram)
    phi_r = evaluate_raw_all(basis, r_axis)
    phi_s = phi_r if s_axis is r_axis else evaluate_raw_all(basis, s_axis)
    values = phi_r.T @ dual.coeff @ phi_s
    return KernelGrid(r_axis, s_axis, values, KernelKind.GENERAL_IDENTITY)


# ---------------------------------------------------------------------------
# Compact oscillator forms
# ---------------------------------------------------------------------------

def _derivative_rows(degree: int, order: int, width: int) -> np.ndarray:
    """Expansion of d^k phi_degree over Hermite functions, rows k = 0..order.

    Repeated application of ``phi_m' = sqrt(m/2) phi_{m-1} - sqrt((m+1)/2) phi_{m+1}``.
    """
    rows = np.zeros((order + 1, width))
    rows[0, degree] = 1.0
    for k in range(order):
        current = rows[k]
        nxt = rows[k + 1]
        for m in np.nonzero(current)[0]:
            cm = current[m]
            if m >= 1:
                nxt[m - 1] += np.sqrt(m / 2.0) * cm
            nxt[m + 1] -= np.sqrt((m + 1) / 2.0) * cm
    return rows


def _as_point_arrays(r, s):
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    scalar = r.ndim == 0 and s.ndim == 0
    r, s = np.broadcast_arrays(np.atleast_1d(r), np.atleast_1d(s))
    return r.astype(float).ravel(), s.astype(float).ravel(), scalar, np.broadcast(r, s).shape


def christoffel_darboux(n: int, r, s):
    """Identity kernel of the first ``n`` oscillator functions in compact form.

    Away from the diagonal this is
    ``sqrt(n/2) [phi_n(s) phi_{n-1}(r) - phi_n(r) phi_{n-1}(s)] / (s - r)``
    (degree convention); within ``CONFLUENT_THRESHOLD`` of the diagonal a
    short Taylor series built from Hermite derivative recurrences replaces
    the ratio, which otherwise loses precision to cancellation.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rr, ss, scalar, shape = _as_point_arrays(r, s)
    alpha = np.sqrt(n / 2.0)
    out = np.empty(rr.size)

    far = np.abs(rr - ss) >= CONFLUENT_THRESHOLD
    if far.any():
        fr = hermite_functions(n, rr[far])
        fs = hermite_functions(n, ss[far])
        out[far] = alpha * (fs[n] * fr[n - 1] - fr[n] * fs[n - 1]) / (ss[far] - rr[far])
    near = ~far
    if near.any():
        out[near] = _cd_series(n, rr[near], ss[near], derivative_order=4)[0]
    if scalar:
        return float(out[0])
    return out.reshape(shape)


def _cd_series(n: int, r: np.ndarray, s: np.ndarray, derivative_order: int):
    """Near-diagonal Taylor series of the compact kernel and, optionally, of
    its second r-derivative.

    With ``u(r) = phi_n(s) phi_{n-1}(r) - phi_n(r) phi_{n-1}(s)`` and
    ``delta = r - s``:

    ``D = -alpha sum_{k>=1} u_k delta^{k-1} / k!``
    ``d2D/dr2 = -alpha sum_{k>=3} u_k (k-1)(k-2) delta^{k-3} / k!``

    where ``u_k`` uses k-th Hermite derivatives at ``s``.  Returns
    ``(D, d2D)``.
    """
    alpha = np.sqrt(n / 2.0)
    width = n + derivative_order + 2
    rows_lo = _derivative_rows(n - 1, derivative_order, width)
    rows_hi = _derivative_rows(n, derivative_order, width)
    table = hermite_functions(width - 1, s)
    lo = rows_lo @ table
    hi = rows_hi @ table
    a = hi[0]
    b = lo[0]
    delta = r - s
    total = np.zeros_like(s)
    second = np.zeros_like(s)
    factorial = 1.0
    for k in range(1, derivative_order + 1):
        factorial *= k
        u_k = a * lo[k] - hi[k] * b
        total += u_k * delta ** (k - 1) / factorial
        if k >= 3:
            second += u_k * (k - 1) * (k - 2) * delta ** (k - 3) / factorial
    return -alpha * total, -alpha * second


def r2_kernel_compact(n: int, r, s, symmetrized: bool = True):
    """Compact form of the projected ``r^2`` kernel.

    ``r^2 D_n(r, s)`` sheds two terms when re-expanded inside the retained
    space, leaving (degree convention)

    ``R_n(r, s) = r^2 D_n(r, s)
                  - sqrt((n-1) n)/2   * phi_n(r)     phi_{n-2}(s)
                  - sqrt(n (n+1))/2   * phi_{n+1}(r) phi_{n-1}(s)``.

    The raw expression is asymmetric in ``(r, s)``; by default the average
    with its transpose is returned, which restores exchange symmetry without
    changing the identity.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rr, ss, scalar, shape = _as_point_arrays(r, s)
    d_values = np.asarray(christoffel_darboux(n, rr, ss))
    tab_r = hermite_functions(n + 1, rr)
    tab_s = hermite_functions(n + 1, ss)

    def corrective(row_table, col_table):
        term = np.sqrt(n * (n + 1)) / 2.0 * row_table[n + 1] * col_table[n - 1]
        if n >= 2:
            term = term + np.sqrt((n - 1) * n) / 2.0 * row_table[n] * col_table[n - 2]
        return term

    raw = rr * rr * d_values - corrective(tab_r, tab_s)
    if symmetrized:
        raw = (raw + ss * ss * d_values - corrective(tab_s, tab_r)) / 2.0
    if scalar:
        return float(raw[0])
    return raw.reshape(shape)


def projected_oscillator_compact(n: int, r, s, split: float = 0.05):
    """Compact form of the oscillator Hamiltonian projected on ``n`` functions.

    Because the expansion functions diagonalise ``-d^2/dr^2 + r^2``, the
    projected kernel equals ``r^2 D_n - d^2 D_n / dr^2`` with no corrective
    terms.  The second derivative is taken analytically: far from the
    diagonal by differentiating the two-term closed form (Hermite functions
    obey ``phi_m'' = (r^2 - 2m - 1) phi_m``), near it by the same Taylor
    series that powers the confluent identity-kernel branch.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rr, ss, scalar, shape = _as_point_arrays(r, s)
    alpha = np.sqrt(n / 2.0)
    out = np.empty(rr.size)

    far = np.abs(rr - ss) >= split
    if far.any():
        rf = rr[far]
        sf = ss[far]
        tab_r = hermite_functions(n + 1, rf)
        tab_s = hermite_functions(n + 1, sf)
        f_lo_r, f_hi_r = tab_r[n - 1], tab_r[n]
        f_lo_s, f_hi_s = tab_s[n - 1], tab_s[n]
        below = tab_r[n - 2] if n >= 2 else np.zeros_like(rf)
        d_lo_r = np.sqrt((n - 1) / 2.0) * below - np.sqrt(n / 2.0) * tab_r[n]
        d_hi_r = np.sqrt(n / 2.0) * tab_r[n - 1] - np.sqrt((n + 1) / 2.0) * tab_r[n + 1]
        dd_lo_r = (rf * rf - (2.0 * (n - 1) + 1.0)) * f_lo_r
        dd_hi_r = (rf * rf - (2.0 * n + 1.0)) * f_hi_r
        delta = rf - sf
        u = f_hi_s * f_lo_r - f_hi_r * f_lo_s
        du = f_hi_s * d_lo_r - d_hi_r * f_lo_s
        ddu = f_hi_s * dd_lo_r - dd_hi_r * f_lo_s
        d_val = -alpha * u / delta
        d2_val = alpha * (-ddu / delta + 2.0 * du / delta ** 2 - 2.0 * u / delta ** 3)
        out[far] = rf * rf * d_val - d2_val
    near = ~far
    if near.any():
        # series order tuned so that (max Hermite frequency * split)^k / k!
        # underflows well before the last retained term
        d_val, d2_val = _cd_series(n, rr[near], ss[near], derivative_order=30)
        out[near] = rr[near] ** 2 * d_val - d2_val
    if scalar:
        return float(out[0])
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def cut_weight(basis: BasisSet, matrix: OperatorMatrix | None = None, s=0.0):
    """Integral over ``r`` of a kernel cut at ``s``.

    Uses analytic line integrals of the basis functions, so no quadrature
    enters: ``w(s) = sum_i m_i chi_i(s)`` for the identity kernel and
    ``sum_ij m_i M_ij chi_j(s)`` with an operator.  Ideal values are 1 for
    identity kernels and 0 for the kinetic kernel.
    """
    moments = integral_moments(basis)
    scalar = np.isscalar(s) or np.ndim(s) == 0
    chi_s = evaluate_all(basis, s)
    row = moments if matrix is None else moments @ matrix.entries
    values = row @ chi_s
    return float(values[0]) if scalar else values


def crest_and_cuts(kernel: KernelGrid, s_values=()):
    """Diagonal profile of a kernel plus cuts at the nearest grid columns.

    Returns ``(crest, cuts)``.  The crest requires a square grid; requesting
    a cut outside the sampled s-range raises :class:`OutOfRangeError`.
    """
    r_axis, s_axis = kernel.r_axis, kernel.s_axis
    if r_axis.size != s_axis.size or not np.allclose(r_axis, s_axis):
        raise ValueError("crest extraction needs identical r and s axes")
    crest = CurveSeries(r_axis.copy(), np.diag(kernel.values).copy(), CurveLabel.CREST)
    cuts = []
    for s in s_values:
        if s < s_axis[0] - 1e-12 or s > s_axis[-1] + 1e-12:
            raise OutOfRangeError(f"cut position {s} outside grid [{s_axis[0]}, {s_axis[-1]}]")
        idx = int(np.argmin(np.abs(s_axis - s)))
        cuts.append(
            CurveSeries(
                r_axis.copy(),
                kernel.values[:, idx].copy(),
                CurveLabel.CUT,
                s_position=float(s_axis[idx]),
            )
        )
    return crest, cuts


def crest_ratio(basis: BasisSet, matrix: OperatorMatrix, r):
    """Crest of an operator kernel divided by the identity crest.

    For a local potential this estimates ``v(r)`` inside the trust region;
    outside it the identity crest collapses and the ratio is refused.
    """
    scalar = np.isscalar(r) or np.ndim(r) == 0
    chi = evaluate_all(basis, r)
    identity_crest = np.einsum("ip,ip->p", chi, chi)
    if np.any(identity_crest <= CREST_FLOOR):
        bad = np.atleast_1d(r)[identity_crest <= CREST_FLOOR]
        raise OutsideTrustRegionError(
            f"identity crest below {CREST_FLOOR:g} at r={bad[0]:g}; outside the trust region"
        )
    operator_crest = np.einsum("ip,ij,jp->p", chi, matrix.entries, chi)
    values = operator_crest / identity_crest
    return float(values[0]) if scalar else values

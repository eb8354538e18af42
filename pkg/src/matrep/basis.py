"""Expansion families and their orthonormalisation.

Four raw families are supported:

* harmonic oscillator functions (square-normalised Hermite functions,
  optionally restricted to one parity),
* a row of equally spaced unit-width Gaussians placed symmetrically about
  the origin,
* the same construction with narrow Gaussians (useful when the target
  operator lives in a small window),
* even pairs ``g(r - c) + g(r + c)`` of symmetrically shifted Gaussians.

Every Gaussian is unit-normalised, ``g_c(r) = pi^{-1/4} beta^{-1/2}
exp(-(r - c)^2 / (2 beta^2))``, so raw overlaps have the closed form
``<g_a|g_b> = exp(-(a - b)^2 / (4 beta^2))``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IllConditionedBasisError, UnsupportedDegreeError
from .jacobi import jacobi_eigh

__all__ = [
    "Family",
    "Parity",
    "OrthoMethod",
    "BasisSpec",
    "BasisSet",
    "DualBasis",
    "hermite_function",
    "hermite_functions",
    "hermite_polynomials",
    "build_raw_family",
    "orthonormalize",
    "dual_basis",
    "realize",
    "evaluate",
    "evaluate_all",
    "evaluate_raw_all",
    "integral_moments",
]

MAX_HERMITE_DEGREE = 500
CONDITION_LIMIT = 1e12


class Family(Enum):
    HARMONIC_OSCILLATOR = "ho"
    SHIFTED_GAUSSIANS = "shifted"
    CENTERED_GAUSSIANS = "centered"
    SYMMETRIC_PAIRS = "pairs"


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"
    BOTH = "both"


class OrthoMethod(Enum):
    LOWDIN = "lowdin"
    GRAM_SCHMIDT = "gs"


@dataclass(frozen=True)
class BasisSpec:
    """Declarative description of an expansion family.

    ``n`` always counts realised basis functions: a parity-restricted
    oscillator spec with ``n`` functions spans Hermite degrees
    ``0, 2, ..., 2(n-1)`` (even) or ``1, 3, ..., 2n-1`` (odd).
    """

    family: Family
    n: int
    beta: float = 1.0
    sigma: float = 1.0
    parity: Parity | None = None
    ortho_method: OrthoMethod = OrthoMethod.LOWDIN

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.beta > 0.0:
            raise ValueError("beta must be positive")
        if self.family is not Family.HARMONIC_OSCILLATOR:
            if not self.sigma > 0.0:
                raise ValueError("sigma must be positive for Gaussian families")
            if self.parity is not None:
                raise ValueError("parity restriction applies to the oscillator family only")
        if self.family is Family.SHIFTED_GAUSSIANS and self.n % 2 != 0:
            raise ValueError("the shifted-Gaussian family requires an even number of functions")

    def degrees(self) -> np.ndarray:
        """Hermite degrees realised by an oscillator spec."""
        if self.family is not Family.HARMONIC_OSCILLATOR:
            raise ValueError("degrees are defined for the oscillator family only")
        if self.parity is Parity.EVEN:
            degs = 2 * np.arange(self.n)
        elif self.parity is Parity.ODD:
            degs = 2 * np.arange(self.n) + 1
        else:
            degs = np.arange(self.n)
        if degs[-1] > MAX_HERMITE_DEGREE:
            raise UnsupportedDegreeError(
                f"spec requires Hermite degree {degs[-1]} > {MAX_HERMITE_DEGREE}"
            )
        return degs

    def centers(self) -> np.ndarray:
        """Gaussian centres; pairs report the positive member of each pair."""
        i = np.arange(1, self.n + 1, dtype=float)
        if self.family is Family.SYMMETRIC_PAIRS:
            return (i - 0.5) * self.sigma
        if self.family in (Family.SHIFTED_GAUSSIANS, Family.CENTERED_GAUSSIANS):
            return i * self.sigma - (self.n + 1) * self.sigma / 2.0
        raise ValueError("centers are defined for Gaussian families only")


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Realised orthonormal family.

    ``coeff`` maps raw to orthonormal functions:
    ``chi_i(r) = sum_j coeff[i, j] phi_j_raw(r)``.
    """

    spec: BasisSpec
    gram: np.ndarray
    coeff: np.ndarray
    condition: float

    def __post_init__(self):
        self.gram.setflags(write=False)
        self.coeff.setflags(write=False)

    @property
    def n(self) -> int:
        return self.spec.n


@dataclass(frozen=True, eq=False)
class DualBasis:
    """Coefficients of the dual family: ``tau_i = sum_j coeff[i, j] phi_j_raw``."""

    coeff: np.ndarray

    def __post_init__(self):
        self.coeff.setflags(write=False)


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------

def hermite_functions(max_degree: int, r) -> np.ndarray:
    """All square-normalised Hermite functions of degree 0..max_degree at r.

    Uses the stable three-term recurrence
    ``phi_{k+1} = sqrt(2/(k+1)) r phi_k - sqrt(k/(k+1)) phi_{k-1}``
    seeded by ``phi_0 = pi^{-1/4} exp(-r^2/2)``; no factorials appear.
    Returns an array of shape ``(max_degree + 1, len(r))``.
    """
    if not 0 <= max_degree <= MAX_HERMITE_DEGREE:
        raise UnsupportedDegreeError(
            f"degree must lie in [0, {MAX_HERMITE_DEGREE}], got {max_degree}"
        )
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty((max_degree + 1, r.size))
    out[0] = np.pi ** -0.25 * np.exp(-r * r / 2.0)
    if max_degree >= 1:
        out[1] = np.sqrt(2.0) * r * out[0]
    for k in range(1, max_degree):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * r * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_polynomials(max_degree: int, r) -> np.ndarray:
    """Polynomial parts ``p_n`` with ``phi_n(r) = p_n(r) exp(-r^2/2)``.

    Same recurrence as :func:`hermite_functions` without the Gaussian seed;
    used by quadratures that fold ``exp(-r^2)`` into the weight.
    """
    if not 0 <= max_degree <= MAX_HERMITE_DEGREE:
        raise UnsupportedDegreeError(
            f"degree must lie in [0, {MAX_HERMITE_DEGREE}], got {max_degree}"
        )
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty((max_degree + 1, r.size))
    out[0] = np.full(r.size, np.pi ** -0.25)
    if max_degree >= 1:
        out[1] = np.sqrt(2.0) * r * out[0]
    for k in range(1, max_degree):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * r * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_function(degree: int, r):
    """Square-normalised Hermite function of the given degree.

    Accepts scalar or array ``r``; scalar input returns a float.
    """
    if not 0 <= degree <= MAX_HERMITE_DEGREE:
        raise UnsupportedDegreeError(
            f"degree must lie in [0, {MAX_HERMITE_DEGREE}], got {degree}"
        )
    scalar = np.isscalar(r) or np.ndim(r) == 0
    values = hermite_functions(degree, r)[degree]
    return float(values[0]) if scalar else values


# ---------------------------------------------------------------------------
# Raw families
# ---------------------------------------------------------------------------

def _unit_gaussian(r: np.ndarray, center: float, beta: float) -> np.ndarray:
    return np.pi ** -0.25 * beta ** -0.5 * np.exp(-((r - center) ** 2) / (2.0 * beta * beta))


def _pair_layout(spec: BasisSpec):
    """Centres and combination weights for Gaussian families.

    Returns ``(centers, weights)`` of shape (n, 1) for single Gaussians and
    (n, 2) for symmetric pairs; each pair is square-normalised including the
    cross overlap of its two members.
    """
    beta = spec.beta
    base = spec.centers()
    if spec.family is Family.SYMMETRIC_PAIRS:
        centers = np.stack([base, -base], axis=1)
        norms = np.sqrt(2.0 * (1.0 + np.exp(-(base ** 2) / (beta * beta))))
        weights = np.stack([1.0 / norms, 1.0 / norms], axis=1)
    else:
        centers = base[:, None]
        weights = np.ones_like(centers)
    return centers, weights


def _gaussian_pair_overlaps(centers: np.ndarray, beta: float) -> np.ndarray:
    diff = centers.reshape(-1)[:, None] - centers.reshape(-1)[None, :]
    return np.exp(-diff * diff / (4.0 * beta * beta))


def _combine(weights: np.ndarray, flat_matrix: np.ndarray) -> np.ndarray:
    """Contract a per-Gaussian matrix into the per-function matrix."""
    n, k = weights.shape
    block = flat_matrix.reshape(n, k, n, k)
    return np.einsum("ik,ikjl,jl->ij", weights, block, weights)


def raw_gram(spec: BasisSpec) -> np.ndarray:
    """Overlap matrix of the raw family (identity for the oscillator)."""
    if spec.family is Family.HARMONIC_OSCILLATOR:
        spec.degrees()  # validates degree range
        return np.eye(spec.n)
    centers, weights = _pair_layout(spec)
    return _combine(weights, _gaussian_pair_overlaps(centers, spec.beta))


def build_raw_family(spec: BasisSpec):
    """Raw expansion functions and their Gram matrix.

    Returns ``(functions, gram)`` where ``functions[i]`` evaluates the i-th
    raw function on scalar or array arguments.
    """
    gram = raw_gram(spec)

    if spec.family is Family.HARMONIC_OSCILLATOR:
        degrees = spec.degrees()

        def make_ho(deg):
            return lambda r: hermite_function(int(deg), r)

        return [make_ho(d) for d in degrees], gram

    centers, weights = _pair_layout(spec)

    def make_gauss(i):
        def func(r):
            scalar = np.isscalar(r) or np.ndim(r) == 0
            rr = np.atleast_1d(np.asarray(r, dtype=float))
            val = sum(
                weights[i, k] * _unit_gaussian(rr, centers[i, k], spec.beta)
                for k in range(centers.shape[1])
            )
            return float(val[0]) if scalar else val

        return func

    return [make_gauss(i) for i in range(spec.n)], gram


# ---------------------------------------------------------------------------
# Orthonormalisation
# ---------------------------------------------------------------------------

def _gram_eigen(gram: np.ndarray):
    eigenvalues, vectors = jacobi_eigh(gram)
    if eigenvalues[0] <= 0.0:
        raise IllConditionedBasisError("overlap matrix is not positive definite")
    condition = eigenvalues[-1] / eigenvalues[0]
    if condition > CONDITION_LIMIT:
        raise IllConditionedBasisError(
            f"overlap condition number {condition:.3e} exceeds {CONDITION_LIMIT:.0e}; "
            "the family is numerically dependent (e.g. sigma << beta)"
        )
    return eigenvalues, vectors, condition


def _refine_orthonormalizer(c: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Newton-Schulz polish of ``C gram C^T = I``.

    The eigenvector mixing left by the Jacobi solver inside near-degenerate
    Gram clusters costs several digits of orthonormality once the condition
    number grows; one quadratically convergent pass restores machine level.
    """
    identity = np.eye(gram.shape[0])
    for _ in range(3):
        defect = c @ gram @ c.T - identity
        if np.abs(defect).max() < 1e-13:
            break
        c = c - 0.5 * defect @ c + 0.375 * defect @ defect @ c
    return c


def orthonormalize(gram: np.ndarray, method: OrthoMethod = OrthoMethod.LOWDIN) -> np.ndarray:
    """Coefficient matrix C with ``C gram C^T = I``.

    Loewdin returns the symmetric inverse square root, which preserves the
    family's approximate translation symmetry; Gram-Schmidt returns the
    lower-triangular factor from a modified Gram-Schmidt sweep in the
    overlap metric.
    """
    gram = np.asarray(gram, dtype=float)
    if np.abs(gram - gram.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(gram).max()):
        raise IllConditionedBasisError("overlap matrix must be symmetric")
    eigenvalues, vectors, _ = _gram_eigen(gram)
    if method is OrthoMethod.LOWDIN:
        c = (vectors * eigenvalues ** -0.5) @ vectors.T
        return _refine_orthonormalizer(c, gram)
    if method is OrthoMethod.GRAM_SCHMIDT:
        n = gram.shape[0]
        c = np.zeros((n, n))
        for i in range(n):
            v = np.zeros(n)
            v[i] = 1.0
            for _ in range(2):  # re-orthogonalise once for safety
                for j in range(i):
                    v -= (c[j] @ gram @ v) * c[j]
            norm_sq = v @ gram @ v
            if norm_sq <= 0.0:
                raise IllConditionedBasisError("Gram-Schmidt hit a non-positive norm")
            c[i] = v / np.sqrt(norm_sq)
        return c
    raise ValueError(f"unknown orthonormalisation method {method!r}")


def dual_basis(gram: np.ndarray) -> DualBasis:
    """Dual-family coefficients D = gram^{-1}, so that ``<tau_i|phi_j> = delta_ij``."""
    gram = np.asarray(gram, dtype=float)
    eigenvalues, vectors, _ = _gram_eigen(gram)
    inverse = (vectors / eigenvalues) @ vectors.T
    identity = np.eye(gram.shape[0])
    for _ in range(3):  # Newton polish: residual squares each pass
        residual = inverse @ gram - identity
        if np.abs(residual).max() < 1e-12:
            break
        inverse = inverse - residual @ inverse
        inverse = (inverse + inverse.T) / 2.0
    return DualBasis(coeff=inverse)


def realize(spec: BasisSpec) -> BasisSet:
    """Construct the orthonormal basis set described by ``spec``."""
    gram = raw_gram(spec)
    if spec.family is Family.HARMONIC_OSCILLATOR:
        # already orthonormal: keep coeff = identity exactly
        return BasisSet(spec=spec, gram=gram, coeff=np.eye(spec.n), condition=1.0)
    _, _, condition = _gram_eigen(gram)
    coeff = orthonormalize(gram, spec.ortho_method)
    return BasisSet(spec=spec, gram=gram, coeff=coeff, condition=condition)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate_raw_all(bset: BasisSet, r) -> np.ndarray:
    """Raw-family values, shape ``(n, len(r))``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    spec = bset.spec
    if spec.family is Family.HARMONIC_OSCILLATOR:
        degrees = spec.degrees()
        return hermite_functions(int(degrees[-1]), r)[degrees]
    centers, weights = _pair_layout(spec)
    # (n, K, npts) Gaussian values contracted over the pair index
    diff = r[None, None, :] - centers[:, :, None]
    gauss = np.pi ** -0.25 * spec.beta ** -0.5 * np.exp(-diff * diff / (2.0 * spec.beta ** 2))
    return np.einsum("ik,ikp->ip", weights, gauss)


def evaluate_all(bset: BasisSet, r) -> np.ndarray:
    """Orthonormal-family values ``chi_i(r)``, shape ``(n, len(r))``."""
    return bset.coeff @ evaluate_raw_all(bset, r)


def evaluate(bset: BasisSet, i: int, r):
    """Value of the i-th orthonormal function (1-based index)."""
    if not 1 <= i <= bset.n:
        raise IndexError(f"basis index {i} outside 1..{bset.n}")
    scalar = np.isscalar(r) or np.ndim(r) == 0
    values = bset.coeff[i - 1] @ evaluate_raw_all(bset, r)
    return float(values[0]) if scalar else values


# ---------------------------------------------------------------------------
# Line integrals
# ---------------------------------------------------------------------------

def _hermite_line_integrals(max_degree: int) -> np.ndarray:
    """Integrals ``int phi_n dr`` for degrees 0..max_degree.

    Odd degrees vanish; even degrees follow
    ``m_n = sqrt((n-1)/n) m_{n-2}`` from ``m_0 = sqrt(2) pi^{1/4}``.
    """
    m = np.zeros(max_degree + 1)
    m[0] = np.sqrt(2.0) * np.pi ** 0.25
    for n in range(2, max_degree + 1, 2):
        m[n] = np.sqrt((n - 1) / n) * m[n - 2]
    return m


def integral_moments(bset: BasisSet) -> np.ndarray:
    """Analytic line integrals ``int chi_i(r) dr`` of the orthonormal family."""
    spec = bset.spec
    if spec.family is Family.HARMONIC_OSCILLATOR:
        degrees = spec.degrees()
        raw = _hermite_line_integrals(int(degrees[-1]))[degrees]
    else:
        _, weights = _pair_layout(spec)
        # every unit Gaussian integrates to (2 sqrt(pi))^{1/2} beta^{1/2}
        gauss_moment = np.sqrt(2.0 * np.sqrt(np.pi) * spec.beta)
        raw = weights.sum(axis=1) * gauss_moment
    return bset.coeff @ raw

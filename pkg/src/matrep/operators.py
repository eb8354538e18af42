"""Matrix elements of operators in a realised basis.

Closed forms are used wherever the family allows them (oscillator functions
for the kinetic and position-squared operators, pairwise Gaussian algebra
for every operator on Gaussian families); local potentials fall back to
quadrature with a built-in refinement check.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import roots_hermite

from .basis import (
    BasisSet,
    Family,
    _pair_layout,
    evaluate_all,
    hermite_polynomials,
)
from .errors import ContractViolationError, QuadratureError

__all__ = [
    "OperatorKind",
    "OperatorMatrix",
    "PotentialSpec",
    "QuadratureScheme",
    "QuadratureRule",
    "gauss_hermite_rule",
    "trapezoid_rule",
    "default_rule",
    "kinetic_matrix",
    "position_squared_matrix",
    "local_potential_matrix",
    "local_potential_closed_form",
    "separable_projection",
    "separable_matrix",
    "hamiltonian_matrix",
]

#: refined and requested quadratures must agree to this before a matrix is accepted
QUADRATURE_AGREEMENT = 1e-8

MAX_GH_ORDER = 600


class OperatorKind(Enum):
    KINETIC = "kinetic"
    POSITION_SQUARED = "r2"
    LOCAL_POTENTIAL = "potential"
    HAMILTONIAN = "hamiltonian"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Symmetric matrix of ``<i|O|j>`` tagged with its basis."""

    basis: BasisSet
    entries: np.ndarray
    kind: OperatorKind

    def __post_init__(self):
        entries = self.entries
        scale = max(1.0, np.abs(entries).max(initial=0.0))
        if np.abs(entries - entries.T).max(initial=0.0) > 1e-12 * scale:
            raise ContractViolationError("operator matrix entries must be symmetric")
        entries.setflags(write=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PotentialSpec:
    """Local potential ``v(r) = sum_k c_k exp(-a_k r^2)``."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), float(a)) for c, a in self.terms)
        if not terms:
            raise ValueError("a potential needs at least one term")
        if any(a <= 0.0 for _, a in terms):
            raise ValueError("all Gaussian exponents must be positive")
        object.__setattr__(self, "terms", terms)

    def values(self, r):
        r = np.asarray(r, dtype=float)
        total = np.zeros_like(r)
        for c, a in self.terms:
            total += c * np.exp(-a * r * r)
        return total


class QuadratureScheme(Enum):
    GAUSS_HERMITE = "gauss-hermite"
    TRAPEZOID = "trapezoid"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    scheme: QuadratureScheme
    nodes: np.ndarray
    weights: np.ndarray
    half_width: float | None = None
    step: float | None = None

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def order(self) -> int:
        return self.nodes.size

    def refined(self) -> "QuadratureRule":
        """Rule with twice the resolution (halved step or doubled order)."""
        if self.scheme is QuadratureScheme.TRAPEZOID:
            half_width = self.half_width if self.half_width is not None else float(self.nodes[-1])
            step = self.step if self.step is not None else float(self.nodes[1] - self.nodes[0])
            return trapezoid_rule(half_width, step / 2.0)
        nodes, weights = _golub_welsch(2 * self.order)
        return QuadratureRule(QuadratureScheme.GAUSS_HERMITE, nodes, weights)


def _golub_welsch(order: int):
    """Gauss-Hermite nodes/weights of the given order.

    Delegates to scipy's Golub-Welsch implementation: weights recovered from
    plain tridiagonal eigenvectors lose the range |x| >~ 8.6 where the true
    first components drop below machine epsilon, which matters whenever high
    Hermite degrees meet the rule.
    """
    return roots_hermite(order)


def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Gauss-Hermite rule: integrates ``exp(-r^2) * poly(deg <= 2*order-1)`` exactly."""
    if not 1 <= order <= MAX_GH_ORDER:
        raise ValueError(f"Gauss-Hermite order must lie in [1, {MAX_GH_ORDER}], got {order}")
    nodes, weights = _golub_welsch(order)
    return QuadratureRule(QuadratureScheme.GAUSS_HERMITE, nodes, weights)


def trapezoid_rule(half_width: float, step: float) -> QuadratureRule:
    """Uniform trapezoid rule on ``[-half_width, half_width]``."""
    if half_width <= 0.0 or step <= 0.0:
        raise ValueError("half_width and step must be positive")
    intervals = max(2, int(round(2.0 * half_width / step)))
    nodes = np.linspace(-half_width, half_width, intervals + 1)
    h = nodes[1] - nodes[0]
    weights = np.full(nodes.size, h)
    weights[0] = weights[-1] = h / 2.0
    return QuadratureRule(QuadratureScheme.TRAPEZOID, nodes, weights, half_width, h)


def default_rule(basis: BasisSet) -> QuadratureRule:
    """Family-appropriate quadrature for potential matrix elements.

    Oscillator bases use Gauss-Hermite (Gaussian potential factors are folded
    into the weight, making every term integral exact); Gaussian families
    integrate on a trapezoid grid wide enough to cover the whole family.
    """
    n = basis.n
    if basis.spec.family is Family.HARMONIC_OSCILLATOR:
        order = min(max(2 * n + 20, 64), MAX_GH_ORDER)
        return gauss_hermite_rule(order)
    return trapezoid_rule(1.5 * np.sqrt(n) + 10.0, 0.01)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _oscillator_band_matrix(degrees: np.ndarray, off_sign: float) -> np.ndarray:
    """Pentadiagonal ``<m|.|n>`` with diagonal ``n + 1/2`` and ``|m-n| = 2``
    coupling ``off_sign * sqrt((n+1)(n+2))/2`` (n the lower degree)."""
    degrees = np.asarray(degrees)
    entries = np.diag(degrees + 0.5).astype(float)
    diff = degrees[:, None] - degrees[None, :]
    low = np.minimum(degrees[:, None], degrees[None, :]).astype(float)
    mask = np.abs(diff) == 2
    entries[mask] = off_sign * np.sqrt((low[mask] + 1.0) * (low[mask] + 2.0)) / 2.0
    return entries


def _gaussian_pair_matrix(basis: BasisSet, pair_value) -> np.ndarray:
    """Assemble ``C M_raw C^T`` from a closed form on Gaussian centre pairs."""
    centers, weights = _pair_layout(basis.spec)
    flat = centers.reshape(-1)
    a = flat[:, None]
    b = flat[None, :]
    raw_flat = pair_value(a, b, basis.spec.beta)
    n, k = weights.shape
    raw = np.einsum(
        "ik,ikjl,jl->ij", weights, raw_flat.reshape(n, k, n, k), weights
    )
    return basis.coeff @ raw @ basis.coeff.T


def _gauss_overlap(a, b, beta):
    return np.exp(-((a - b) ** 2) / (4.0 * beta * beta))


def _gauss_kinetic(a, b, beta):
    d2 = (a - b) ** 2
    return (1.0 / (2.0 * beta * beta)) * (1.0 - d2 / (2.0 * beta * beta)) * _gauss_overlap(a, b, beta)


def _gauss_r2(a, b, beta):
    mid = (a + b) / 2.0
    return (beta * beta / 2.0 + mid * mid) * _gauss_overlap(a, b, beta)


def kinetic_matrix(basis: BasisSet) -> OperatorMatrix:
    """Matrix of ``-d^2/dr^2``.

    Oscillator: ``<n|T|n> = n + 1/2`` and ``<n|T|n+2> = -sqrt((n+1)(n+2))/2``
    in the degree convention.  Gaussian families use the equal-width closed
    form on raw centres and transform with the orthonormalisation coefficients.
    """
    if basis.spec.family is Family.HARMONIC_OSCILLATOR:
        entries = _oscillator_band_matrix(basis.spec.degrees(), -1.0)
    else:
        entries = _gaussian_pair_matrix(basis, _gauss_kinetic)
        entries = (entries + entries.T) / 2.0
    return OperatorMatrix(basis, entries, OperatorKind.KINETIC)


def position_squared_matrix(basis: BasisSet) -> OperatorMatrix:
    """Matrix of ``r^2`` (same band structure as the kinetic matrix with the
    opposite off-diagonal sign, so their sum is diagonal on oscillator bases)."""
    if basis.spec.family is Family.HARMONIC_OSCILLATOR:
        entries = _oscillator_band_matrix(basis.spec.degrees(), +1.0)
    else:
        entries = _gaussian_pair_matrix(basis, _gauss_r2)
        entries = (entries + entries.T) / 2.0
    return OperatorMatrix(basis, entries, OperatorKind.POSITION_SQUARED)


def local_potential_closed_form(basis: BasisSet, v: PotentialSpec) -> np.ndarray:
    """Exact ``<i|v|j>`` for Gaussian raw families (product of Gaussians is
    Gaussian); serves as the internal cross-check of the quadrature path."""
    if basis.spec.family is Family.HARMONIC_OSCILLATOR:
        raise ValueError("closed form applies to Gaussian families only")

    def pair_value(a, b, beta):
        total = np.zeros(np.broadcast(a, b).shape)
        for c, alpha in v.terms:
            denom = 1.0 + alpha * beta * beta
            mid = (a + b) / 2.0
            total += c * _gauss_overlap(a, b, beta) / np.sqrt(denom) * np.exp(
                -alpha * mid * mid / denom
            )
        return total

    entries = _gaussian_pair_matrix(basis, pair_value)
    return (entries + entries.T) / 2.0


# ---------------------------------------------------------------------------
# Quadrature paths
# ---------------------------------------------------------------------------

def _ho_potential_on_nodes(basis: BasisSet, v: PotentialSpec, nodes, weights) -> np.ndarray:
    """Oscillator potential matrix on a Gauss-Hermite rule.

    Each Gaussian term is absorbed by the substitution u = sqrt(1+a) r, which
    leaves a polynomial against exp(-u^2): the rule is exact once its order
    exceeds the highest Hermite degree.
    """
    degrees = basis.spec.degrees()
    max_degree = int(degrees[-1])
    entries = np.zeros((basis.n, basis.n))
    for c, a in v.terms:
        scale = 1.0 / np.sqrt(1.0 + a)
        table = hermite_polynomials(max_degree, nodes * scale)[degrees]
        entries += (c * scale) * (table * weights) @ table.T
    return entries


def _grid_potential_on_nodes(basis: BasisSet, v: PotentialSpec, nodes, weights) -> np.ndarray:
    chi = evaluate_all(basis, nodes)
    return (chi * (weights * v.values(nodes))) @ chi.T


def _apply_parity_selection(basis: BasisSet, entries: np.ndarray) -> np.ndarray:
    # even potentials cannot couple opposite oscillator parities; enforce the
    # analytic zeros rather than keep quadrature round-off there
    if basis.spec.family is Family.HARMONIC_OSCILLATOR:
        degrees = basis.spec.degrees()
        odd = degrees % 2
        entries[odd[:, None] != odd[None, :]] = 0.0
    return entries


def local_potential_matrix(
    basis: BasisSet, v: PotentialSpec, rule: QuadratureRule | None = None
) -> OperatorMatrix:
    """Matrix of a local Gaussian-sum potential by quadrature.

    The requested rule is checked against a refined one (doubled order or
    halved step); Gaussian families are additionally checked against the
    exact closed form.  Disagreement beyond ``QUADRATURE_AGREEMENT`` raises
    :class:`QuadratureError`.
    """
    if rule is None:
        rule = default_rule(basis)
    family = basis.spec.family
    if rule.scheme is QuadratureScheme.GAUSS_HERMITE:
        if family is not Family.HARMONIC_OSCILLATOR:
            raise ValueError(
                "the Gauss-Hermite scheme applies to the oscillator family; "
                "use a trapezoid rule for Gaussian families"
            )
        entries = _ho_potential_on_nodes(basis, v, rule.nodes, rule.weights)
        fine = rule.refined()
        refined = _ho_potential_on_nodes(basis, v, fine.nodes, fine.weights)
    else:
        entries = _grid_potential_on_nodes(basis, v, rule.nodes, rule.weights)
        fine = rule.refined()
        refined = _grid_potential_on_nodes(basis, v, fine.nodes, fine.weights)
    if np.abs(entries - refined).max() > QUADRATURE_AGREEMENT:
        raise QuadratureError(
            "refined quadrature moved a matrix entry by more than "
            f"{QUADRATURE_AGREEMENT:g}; increase the rule resolution"
        )
    if family is not Family.HARMONIC_OSCILLATOR:
        closed = local_potential_closed_form(basis, v)
        if np.abs(entries - closed).max() > QUADRATURE_AGREEMENT:
            raise QuadratureError("quadrature disagrees with the exact Gaussian closed form")
    entries = _apply_parity_selection(basis, (entries + entries.T) / 2.0)
    return OperatorMatrix(basis, entries, OperatorKind.LOCAL_POTENTIAL)


def separable_projection(basis: BasisSet, xi, rule: QuadratureRule | None = None) -> np.ndarray:
    """Coefficients ``g_i = int chi_i(r) xi(r) dr`` of a form factor.

    ``xi`` must accept ndarray arguments.  The rank-one separable operator is
    the outer product ``g g^T`` (see :func:`separable_matrix`).
    """
    if rule is None:
        rule = default_rule(basis)

    if rule.scheme is QuadratureScheme.GAUSS_HERMITE:
        if basis.spec.family is not Family.HARMONIC_OSCILLATOR:
            raise ValueError("Gauss-Hermite separable projections need the oscillator family")
        degrees = basis.spec.degrees()

        def on_rule(nodes, weights):
            # u = r / sqrt(2) cancels the half-Gaussian of chi_i exactly
            y = np.sqrt(2.0) * nodes
            table = hermite_polynomials(int(degrees[-1]), y)[degrees]
            return np.sqrt(2.0) * table @ (weights * np.asarray(xi(y), dtype=float))

        g = on_rule(rule.nodes, rule.weights)
        fine = rule.refined()
        refined = on_rule(fine.nodes, fine.weights)
    else:

        def on_rule(rule_):
            chi = evaluate_all(basis, rule_.nodes)
            return chi @ (rule_.weights * np.asarray(xi(rule_.nodes), dtype=float))

        g = on_rule(rule)
        refined = on_rule(rule.refined())
    if np.abs(g - refined).max() > QUADRATURE_AGREEMENT:
        raise QuadratureError("separable projection quadrature did not converge")
    return g


def separable_matrix(basis: BasisSet, xi, rule: QuadratureRule | None = None) -> OperatorMatrix:
    """Rank-one operator matrix ``g g^T`` for the form factor ``xi``."""
    g = separable_projection(basis, xi, rule)
    return OperatorMatrix(basis, np.outer(g, g), OperatorKind.CUSTOM)


def hamiltonian_matrix(
    basis: BasisSet, v: PotentialSpec | None, rule: QuadratureRule | None = None
) -> OperatorMatrix:
    """Matrix of ``-d^2/dr^2 + v(r)``; ``v=None`` degrades to the kinetic part."""
    entries = kinetic_matrix(basis).entries.copy()
    if v is not None:
        entries = entries + local_potential_matrix(basis, v, rule).entries
    return OperatorMatrix(basis, entries, OperatorKind.HAMILTONIAN)

"""Operator matrix assembly: closed forms, quadrature, cross-checks."""

import numpy as np
import pytest

from matrep.basis import BasisSpec, Family, OrthoMethod, evaluate, hermite_function, realize
from matrep.errors import ContractViolationError, QuadratureError
from matrep.operators import (
    OperatorKind,
    OperatorMatrix,
    PotentialSpec,
    QuadratureScheme,
    default_rule,
    gauss_hermite_rule,
    hamiltonian_matrix,
    kinetic_matrix,
    local_potential_closed_form,
    local_potential_matrix,
    position_squared_matrix,
    separable_matrix,
    separable_projection,
    trapezoid_rule,
)
from matrep.oracle import integrate

PI14 = np.pi ** -0.25


@pytest.fixture(scope="module")
def ho10():
    return realize(BasisSpec(Family.HARMONIC_OSCILLATOR, 10))


# ---------------------------------------------------------------------------
# quadrature rules
# ---------------------------------------------------------------------------

def test_gh_rule_order_one():
    rule = gauss_hermite_rule(1)
    assert rule.nodes == pytest.approx([0.0])
    assert rule.weights == pytest.approx([np.sqrt(np.pi)])


def test_gh_rule_order_two():
    rule = gauss_hermite_rule(2)
    assert np.sort(rule.nodes) == pytest.approx([-1 / np.sqrt(2), 1 / np.sqrt(2)], abs=1e-14)
    assert rule.weights == pytest.approx([np.sqrt(np.pi) / 2] * 2, abs=1e-14)


def test_gh_gaussian_second_moment():
    rule = gauss_hermite_rule(5)
    value = (rule.weights * rule.nodes ** 2).sum()
    assert value == pytest.approx(np.sqrt(np.pi) / 2, abs=1e-13)


def test_gh_monomials_exact_at_order_16():
    rule = gauss_hermite_rule(16)
    # exact moments of exp(-x^2): odd vanish, even = gamma((k+1)/2); the
    # degree-20 moment is ~1.1e6, so "1e-10" is only meaningful relative
    from math import gamma

    for k in range(21):
        exact = 0.0 if k % 2 else gamma((k + 1) / 2)
        value = (rule.weights * rule.nodes ** k).sum()
        assert value == pytest.approx(exact, rel=1e-10, abs=1e-10)


def test_gh_weight_sum():
    for order in (3, 64, 420, 600):
        rule = gauss_hermite_rule(order)
        assert rule.weights.sum() == pytest.approx(np.sqrt(np.pi), abs=1e-12)
        assert np.isfinite(rule.weights).all()
        # extreme weights at high order underflow float64 (true values < 1e-308)
        assert (rule.weights >= 0).all()
        if order <= 64:
            assert (rule.weights > 0).all()


def test_gh_order_out_of_range():
    with pytest.raises(ValueError):
        gauss_hermite_rule(0)
    with pytest.raises(ValueError):
        gauss_hermite_rule(601)


def test_trapezoid_rule_weights():
    rule = trapezoid_rule(2.0, 0.5)
    assert rule.nodes[0] == -2.0 and rule.nodes[-1] == 2.0
    assert rule.weights.sum() == pytest.approx(4.0, abs=1e-14)


# ---------------------------------------------------------------------------
# kinetic matrix
# ---------------------------------------------------------------------------

def test_kinetic_ground_diagonal_by_quadrature(ho10):
    # independent oracle: <0|T|0> = int phi_0'(r)^2 dr with the analytic derivative
    def dphi0(r):
        return -r * PI14 * np.exp(-r * r / 2)

    expected = integrate(lambda r: dphi0(r) ** 2, 12.0, tol=1e-12)
    entries = kinetic_matrix(ho10).entries
    assert entries[0, 0] == pytest.approx(expected, abs=1e-10)
    assert entries[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_kinetic_offdiagonal_by_quadrature(ho10):
    def dphi0(r):
        return -r * PI14 * np.exp(-r * r / 2)

    def dphi2(r):
        # d/dr [pi^-1/4 (2r^2-1) e^{-r^2/2} / sqrt(2)]
        return PI14 / np.sqrt(2) * (5 * r - 2 * r ** 3) * np.exp(-r * r / 2)

    expected = integrate(lambda r: dphi0(r) * dphi2(r), 12.0, tol=1e-12)
    entries = kinetic_matrix(ho10).entries
    assert entries[0, 2] == pytest.approx(expected, abs=1e-10)
    assert entries[0, 2] == pytest.approx(-np.sqrt(2) / 2, abs=1e-12)


def test_kinetic_band_structure(ho10):
    entries = kinetic_matrix(ho10).entries
    for i in range(10):
        for j in range(10):
            if abs(i - j) not in (0, 2):
                assert entries[i, j] == 0.0


def test_kinetic_ladder_quadrature_exhaustive():
    # oracle: phi_n' = sqrt(n/2) phi_{n-1} - sqrt((n+1)/2) phi_{n+1}
    n = 6
    bset = realize(BasisSpec(Family.HARMONIC_OSCILLATOR, n))

    def dphi(k, r):
        low = np.sqrt(k / 2) * hermite_function(k - 1, r) if k >= 1 else 0.0
        return low - np.sqrt((k + 1) / 2) * hermite_function(k + 1, r)

    entries = kinetic_matrix(bset).entries
    for i in range(n):
        for j in range(i, n):
            expected = integrate(lambda r, i=i, j=j: dphi(i, r) * dphi(j, r), 12.0, tol=1e-12)
            assert entries[i, j] == pytest.approx(expected, abs=1e-9)


def test_kinetic_closed_form_exhaustive_n50():
    # independent route: derivative ladder in polynomial form against a
    # Gauss-Hermite rule (the pair of half-Gaussians supplies the weight)
    from matrep.basis import hermite_polynomials

    n = 50
    rule = gauss_hermite_rule(2 * n + 20)
    poly = hermite_polynomials(n + 1, rule.nodes)
    dpoly = np.zeros((n, rule.order))
    for k in range(n):
        dpoly[k] = -np.sqrt((k + 1) / 2) * poly[k + 1]
        if k >= 1:
            dpoly[k] += np.sqrt(k / 2) * poly[k - 1]
    quadrature = (dpoly * rule.weights) @ dpoly.T
    entries = kinetic_matrix(realize(BasisSpec(Family.HARMONIC_OSCILLATOR, n))).entries
    assert np.abs(quadrature - entries).max() < 1e-9


def test_r2_closed_form_exhaustive_n50():
    from matrep.basis import hermite_polynomials

    n = 50
    rule = gauss_hermite_rule(2 * n + 20)
    poly = hermite_polynomials(n - 1, rule.nodes)
    quadrature = (poly * (rule.weights * rule.nodes ** 2)) @ poly.T
    entries = position_squared_matrix(realize(BasisSpec(Family.HARMONIC_OSCILLATOR, n))).entries
    assert np.abs(quadrature - entries).max() < 1e-9


def test_gaussian_r2_closed_form_exhaustive_pairs():
    bset = realize(BasisSpec(Family.SYMMETRIC_PAIRS, 8, beta=0.5, sigma=0.5))
    from matrep.basis import evaluate_all
    from matrep.operators import trapezoid_rule as trap

    rule = trap(14.0, 0.005)
    chi = evaluate_all(bset, rule.nodes)
    quadrature = (chi * (rule.weights * rule.nodes ** 2)) @ chi.T
    entries = position_squared_matrix(bset).entries
    assert np.abs(quadrature - entries).max() < 1e-9


def test_gaussian_kinetic_diagonal():
    beta = 0.7
    bset = realize(BasisSpec(Family.SHIFTED_GAUSSIANS, 2, beta=beta, sigma=50.0))
    # sigma >> beta: well separated, raw ~ orthonormal, diagonal = 1/(2 beta^2)
    entries = kinetic_matrix(bset).entries
    assert entries[0, 0] == pytest.approx(1 / (2 * beta * beta), abs=1e-10)


def test_gaussian_kinetic_quadrature_exhaustive():
    spec = BasisSpec(Family.SHIFTED_GAUSSIANS, 4, beta=0.8, sigma=1.1)
    bset = realize(spec)
    entries = kinetic_matrix(bset).entries
    step = 1e-5

    def chi(i, r):
        return evaluate(bset, i, r)

    for i in range(1, 5):
        for j in range(i, 5):
            expected = integrate(
                lambda r, i=i, j=j: (chi(i, r + step) - chi(i, r - step))
                / (2 * step)
                * (chi(j, r + step) - chi(j, r - step))
                / (2 * step),
                14.0,
                tol=1e-11,
            )
            assert entries[i - 1, j - 1] == pytest.approx(expected, abs=1e-7)


# ---------------------------------------------------------------------------
# position-squared matrix
# ---------------------------------------------------------------------------

def test_r2_ground_value(ho10):
    assert position_squared_matrix(ho10).entries[0, 0] == pytest.approx(0.5, abs=1e-14)


def test_t_plus_r2_diagonal(ho10):
    total = kinetic_matrix(ho10).entries + position_squared_matrix(ho10).entries
    assert np.abs(total - np.diag(2.0 * np.arange(10) + 1.0)).max() == 0.0


def test_r2_quadrature_exhaustive(ho10):
    entries = position_squared_matrix(ho10).entries
    for i in range(6):
        for j in range(i, 6):
            expected = integrate(
                lambda r, i=i, j=j: r * r * hermite_function(i, r) * hermite_function(j, r),
                12.0,
                tol=1e-12,
            )
            assert entries[i, j] == pytest.approx(expected, abs=1e-9)


def test_gaussian_r2_at_origin_by_quadrature():
    beta = 0.6
    bset = realize(BasisSpec(Family.CENTERED_GAUSSIANS, 1, beta=beta, sigma=1.0))
    expected = integrate(lambda r: r * r * evaluate(bset, 1, r) ** 2, 10.0, tol=1e-12)
    value = position_squared_matrix(bset).entries[0, 0]
    assert value == pytest.approx(expected, abs=1e-10)
    assert value == pytest.approx(beta * beta / 2, abs=1e-12)


def test_r2_spot_check_n200():
    bset = realize(BasisSpec(Family.HARMONIC_OSCILLATOR, 200))
    entries = position_squared_matrix(bset).entries
    assert entries[199, 199] == pytest.approx(199.5, abs=1e-12)
    assert entries[150, 152] == pytest.approx(np.sqrt(151 * 152) / 2, abs=1e-12)


# ---------------------------------------------------------------------------
# local potentials
# ---------------------------------------------------------------------------

def test_potential_spec_validation():
    with pytest.raises(ValueError):
        PotentialSpec(())
    with pytest.raises(ValueError):
        PotentialSpec(((1.0, -2.0),))


def test_attractive_gaussian_ground_entry(ho10):
    # analytic: <0|e^{-r^2}|0> = pi^{-1/2} int e^{-2r^2} = 1/sqrt(2)
    matrix = local_potential_matrix(ho10, PotentialSpec(((-1.0, 1.0),)))
    assert matrix.entries[0, 0] == pytest.approx(-1 / np.sqrt(2), abs=1e-12)


def test_zero_coefficient_gives_zero_matrix(ho10):
    matrix = local_potential_matrix(ho10, PotentialSpec(((0.0, 3.0),)))
    assert np.abs(matrix.entries).max() == 0.0


def test_parity_selection_rule(ho10):
    matrix = local_potential_matrix(ho10, PotentialSpec(((1.0, 2.0),)))
    for i in range(10):
        for j in range(10):
            if (i - j) % 2 == 1:
                assert matrix.entries[i, j] == 0.0


def test_ho_potential_against_adaptive_quadrature(ho10):
    v = PotentialSpec(((1.0, 9.0), (-1.0, 1.0)))
    matrix = local_potential_matrix(ho10, v)
    for i in range(1, 6):
        for j in range(i, 6):
            expected = integrate(
                lambda r, i=i, j=j: evaluate(ho10, i, r) * v.values(r) * evaluate(ho10, j, r),
                12.0,
                tol=1e-12,
            )
            assert matrix.entries[i - 1, j - 1] == pytest.approx(expected, abs=1e-9)


def test_gaussian_family_quadrature_vs_closed_form():
    bset = realize(BasisSpec(Family.SYMMETRIC_PAIRS, 8, beta=0.5, sigma=0.5))
    v = PotentialSpec(((1.0, 9.0), (-1.0, 1.0)))
    quad = local_potential_matrix(bset, v).entries
    closed = local_potential_closed_form(bset, v)
    assert np.abs(quad - closed).max() < 1e-9


def test_coarse_trapezoid_raises():
    bset = realize(BasisSpec(Family.SHIFTED_GAUSSIANS, 8))
    with pytest.raises(QuadratureError):
        local_potential_matrix(bset, PotentialSpec(((1.0, 9.0),)), trapezoid_rule(6.0, 1.5))


def test_gh_rule_rejected_for_gaussian_family():
    bset = realize(BasisSpec(Family.SHIFTED_GAUSSIANS, 4))
    with pytest.raises(ValueError):
        local_potential_matrix(bset, PotentialSpec(((1.0, 1.0),)), gauss_hermite_rule(32))


def test_hand_built_trapezoid_rule_accepted(ho10):
    # a rule constructed without the metadata fields still refines correctly
    from matrep.operators import QuadratureRule, QuadratureScheme

    nodes = np.linspace(-12.0, 12.0, 2401)
    weights = np.full(nodes.size, nodes[1] - nodes[0])
    weights[0] = weights[-1] = (nodes[1] - nodes[0]) / 2
    rule = QuadratureRule(QuadratureScheme.TRAPEZOID, nodes, weights)
    bset = realize(BasisSpec(Family.SHIFTED_GAUSSIANS, 6))
    v = PotentialSpec(((-1.0, 1.0),))
    matrix = local_potential_matrix(bset, v, rule)
    closed = local_potential_closed_form(bset, v)
    assert np.abs(matrix.entries - closed).max() < 1e-9


def test_default_rule_schemes(ho10):
    assert default_rule(ho10).scheme is QuadratureScheme.GAUSS_HERMITE
    shifted = realize(BasisSpec(Family.SHIFTED_GAUSSIANS, 4))
    assert default_rule(shifted).scheme is QuadratureScheme.TRAPEZOID


# ---------------------------------------------------------------------------
# separable potentials
# ---------------------------------------------------------------------------

def test_separable_projection_of_basis_function(ho10):
    g = separable_projection(ho10, lambda r: hermite_function(0, r))
    expected = np.zeros(10)
    expected[0] = 1.0
    assert g == pytest.approx(expected, abs=1e-10)


def test_separable_projection_parity(ho10):
    g = separable_projection(ho10, lambda r: np.exp(-r * r / 2))
    assert np.abs(g[1::2]).max() < 1e-14


def test_separable_bessel_monotone():
    xi = lambda r: np.exp(-((r - 0.5) ** 2))
    norm_sq = integrate(lambda r: xi(r) ** 2, 12.0, tol=1e-12)
    previous = 0.0
    for n in range(1, 21):
        bset = realize(BasisSpec(Family.HARMONIC_OSCILLATOR, n))
        partial = float((separable_projection(bset, xi) ** 2).sum())
        assert partial <= norm_sq + 1e-10
        assert partial >= previous - 1e-12
        previous = partial


def test_separable_matrix_rank_one(ho10):
    matrix = separable_matrix(ho10, lambda r: np.exp(-r * r))
    g = separable_projection(ho10, lambda r: np.exp(-r * r))
    assert np.abs(matrix.entries - np.outer(g, g)).max() < 1e-14
    assert matrix.kind is OperatorKind.CUSTOM


# ---------------------------------------------------------------------------
# hamiltonian
# ---------------------------------------------------------------------------

def test_hamiltonian_without_potential(ho10):
    h = hamiltonian_matrix(ho10, None)
    assert np.array_equal(h.entries, kinetic_matrix(ho10).entries)
    assert h.kind is OperatorKind.HAMILTONIAN


def test_spectrum_invariance_under_method():
    from matrep.spectral import eigen_symmetric

    v = PotentialSpec(((-1.0, 1.0),))
    spectra = []
    for method in (OrthoMethod.LOWDIN, OrthoMethod.GRAM_SCHMIDT):
        bset = realize(BasisSpec(Family.SHIFTED_GAUSSIANS, 16, ortho_method=method))
        spectra.append(eigen_symmetric(hamiltonian_matrix(bset, v)).eigenvalues)
    assert np.abs(spectra[0] - spectra[1]).max() < 1e-9


def test_operator_matrix_requires_symmetry(ho10):
    entries = np.zeros((10, 10))
    entries[0, 1] = 1.0
    with pytest.raises(ContractViolationError):
        OperatorMatrix(ho10, entries, OperatorKind.CUSTOM)

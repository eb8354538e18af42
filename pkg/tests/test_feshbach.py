"""Included/excluded-block partition and the energy-dependent correction."""

import numpy as np
import pytest

from matrep.basis import BasisSpec, Family, Parity, realize
from matrep.errors import ConvergenceError, ResolventPoleError
from matrep.feshbach import (
    effective_kernel,
    partition,
    render_effective,
    solve_selfconsistent,
)
from matrep.operators import (
    OperatorKind,
    OperatorMatrix,
    PotentialSpec,
    hamiltonian_matrix,
)
from matrep.spectral import eigen_symmetric

DEEP_WELL = PotentialSpec(((10.0, 9.0), (-5.0, 1.0)))


@pytest.fixture(scope="module")
def deep_well_h():
    basis = realize(BasisSpec(Family.HARMONIC_OSCILLATOR, 26, parity=Parity.EVEN))
    return hamiltonian_matrix(basis, DEEP_WELL)


def toy_operator(entries):
    basis = realize(BasisSpec(Family.HARMONIC_OSCILLATOR, entries.shape[0]))
    return OperatorMatrix(basis, np.asarray(entries, dtype=float), OperatorKind.CUSTOM)


# ---------------------------------------------------------------------------
# partition
# ---------------------------------------------------------------------------

def test_partition_shapes(deep_well_h):
    part = partition(deep_well_h, 5, 26)
    assert part.php.shape == (5, 5)
    assert part.phq.shape == (5, 21)
    assert part.qhq.shape == (21, 21)
    assert np.array_equal(part.php, deep_well_h.entries[:5, :5])


def test_partition_single_excluded_state(deep_well_h):
    part = partition(deep_well_h, 25, 26)
    assert part.qhq.shape == (1, 1)


def test_partition_range_validation(deep_well_h):
    for n1, n2 in ((0, 5), (5, 5), (5, 27), (-1, 3)):
        with pytest.raises(ValueError):
            partition(deep_well_h, n1, n2)


# ---------------------------------------------------------------------------
# effective kernel
# ---------------------------------------------------------------------------

def test_decoupled_blocks_give_zero_kernel():
    entries = np.diag([1.0, 2.0, 5.0, 7.0])
    part = partition(toy_operator(entries), 2, 4)
    w = effective_kernel(part, -3.0)
    assert np.abs(w).max() == 0.0


@pytest.mark.parametrize("e", [-2.0, -0.5, 0.9])
def test_two_by_two_closed_form(e):
    a, b, d = 1.0, 0.7, 2.0
    part = partition(toy_operator(np.array([[a, b], [b, d]])), 1, 2)
    w = effective_kernel(part, e)
    assert w.shape == (1, 1)
    assert w[0, 0] == pytest.approx(b * b / (e - d), abs=1e-12)


def test_two_by_two_fixed_point_matches_quadratic_formula():
    a, b, d = 1.0, 0.7, 2.0
    # oracle: exact ground eigenvalue of [[a, b], [b, d]]
    exact = (a + d) / 2 - np.sqrt(((a - d) / 2) ** 2 + b * b)
    part = partition(toy_operator(np.array([[a, b], [b, d]])), 1, 2)
    solve = solve_selfconsistent(part, tol=1e-13)
    assert solve.energy == pytest.approx(exact, abs=1e-10)


def test_pole_guard():
    a, b, d = 1.0, 0.7, 2.0
    part = partition(toy_operator(np.array([[a, b], [b, d]])), 1, 2)
    with pytest.raises(ResolventPoleError):
        effective_kernel(part, d)


def test_effective_kernel_negative_semidefinite(deep_well_h):
    part = partition(deep_well_h, 5, 26)
    q_bottom = eigen_symmetric(part.qhq).eigenvalues[0]
    w = effective_kernel(part, q_bottom - 1.0)
    values = np.linalg.eigvalsh(w)
    assert values.max() <= 1e-12
    assert np.abs(w - w.T).max() < 1e-14


# ---------------------------------------------------------------------------
# self-consistent solve
# ---------------------------------------------------------------------------

def test_decoupled_solve_converges_immediately():
    entries = np.diag([1.5, 3.0, 8.0, 9.0])
    part = partition(toy_operator(entries), 2, 4)
    solve = solve_selfconsistent(part)
    assert solve.energy == pytest.approx(1.5, abs=1e-14)
    assert solve.iterations == 1


def test_selfconsistent_matches_full_block(deep_well_h):
    part = partition(deep_well_h, 5, 26)
    solve = solve_selfconsistent(part)
    full = eigen_symmetric(deep_well_h)
    assert abs(solve.energy - full.eigenvalues[0]) < 1e-8
    # converged state equals the renormalised included-block slice of the
    # full ground vector
    projected = full.vectors[0][:5]
    projected = projected / np.linalg.norm(projected)
    if projected[np.argmax(np.abs(projected))] < 0:
        projected = -projected
    assert np.abs(solve.p_state - projected).max() < 1e-6


@pytest.mark.parametrize("n1,n2", [(3, 10), (5, 26), (10, 20), (2, 26)])
def test_exactness_across_partitions(deep_well_h, n1, n2):
    part = partition(deep_well_h, n1, n2)
    solve = solve_selfconsistent(part)
    block = eigen_symmetric(deep_well_h.entries[:n2, :n2])
    assert abs(solve.energy - block.eigenvalues[0]) < 1e-8
    projected = block.vectors[0][:n1]
    projected = projected / np.linalg.norm(projected)
    if projected[np.argmax(np.abs(projected))] < 0:
        projected = -projected
    assert np.abs(solve.p_state - projected).max() < 1e-6


def test_reference_energies(deep_well_h):
    part = partition(deep_well_h, 5, 26)
    solve = solve_selfconsistent(part)
    included_only = eigen_symmetric(part.php).eigenvalues[0]
    assert solve.energy == pytest.approx(-0.7342, abs=1e-4)
    assert included_only == pytest.approx(-0.6897, abs=1e-4)


def test_variational_ordering(deep_well_h):
    from matrep.oracle import fd_ground_state

    part = partition(deep_well_h, 5, 26)
    included_only = float(eigen_symmetric(part.php).eigenvalues[0])
    full_block = float(eigen_symmetric(deep_well_h).eigenvalues[0])
    exact = fd_ground_state(DEEP_WELL).eigenvalue
    assert included_only > full_block > exact


def test_history_and_iteration_budget(deep_well_h):
    part = partition(deep_well_h, 5, 26)
    solve = solve_selfconsistent(part, tol=1e-12)
    assert len(solve.history) == solve.iterations + 1
    assert abs(solve.history[-1] - solve.history[-2]) < 1e-12
    with pytest.raises(ConvergenceError):
        solve_selfconsistent(part, tol=1e-14, max_iter=1)
    with pytest.raises(ValueError):
        solve_selfconsistent(part, tol=0.0)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def test_render_decoupled_effective_is_zero():
    entries = np.diag([1.0, 2.0, 3.0, 4.0])
    part = partition(toy_operator(entries), 2, 4)
    grid = render_effective(part, 0.0, r_axis=np.linspace(-3, 3, 13))
    assert np.abs(grid.values).max() == 0.0


def test_render_effective_symmetric(deep_well_h):
    part = partition(deep_well_h, 5, 26)
    solve = solve_selfconsistent(part)
    grid = render_effective(part, solve.energy, r_axis=np.linspace(-4, 4, 33))
    assert np.abs(grid.values - grid.values.T).max() < 1e-10


def test_effective_kernel_less_local_than_included_block(deep_well_h):
    # diagonal-band mass fraction: the included-block kernel is quasi-local
    # along r = +-s, the effective correction is not
    part = partition(deep_well_h, 5, 26)
    solve = solve_selfconsistent(part)
    axis = np.linspace(-4.0, 4.0, 81)
    from matrep.basis import evaluate_all

    chi = evaluate_all(part.basis, axis)[:5]
    included_grid = np.abs(chi.T @ part.php @ chi)
    effective_grid = np.abs(render_effective(part, solve.energy, r_axis=axis).values)

    r = axis[:, None]
    s = axis[None, :]
    band = (np.abs(r - s) < 1.0) | (np.abs(r + s) < 1.0)

    included_fraction = included_grid[band].sum() / included_grid.sum()
    effective_fraction = effective_grid[band].sum() / effective_grid.sum()
    assert effective_fraction < included_fraction

"""Included/excluded-space partition of a Hamiltonian matrix.

Splitting the retained basis into a small included block (first ``n1``
functions) and an excluded block (functions ``n1+1 .. n2``) turns the
eigenproblem into a self-consistent one on the included block: the excluded
block acts through the energy-dependent kernel
``W(E) = B (E - Q)^{-1} B^T`` built from the coupling block ``B`` and the
excluded block ``Q``.  The fixed point of the ground eigenvalue of
``P + W(E)`` reproduces the ground state of the full retained block exactly.
"""

from dataclasses import dataclass

import numpy as np

from .basis import BasisSet, evaluate_all
from .errors import ConvergenceError, ResolventPoleError
from .jacobi import jacobi_eigh
from .kernels import KernelGrid, KernelKind, default_axis
from .operators import OperatorMatrix
from .spectral import eigen_symmetric

__all__ = [
    "FeshbachPartition",
    "EffectiveSolve",
    "partition",
    "effective_kernel",
    "solve_selfconsistent",
    "render_effective",
]

POLE_GUARD = 1e-10


@dataclass(frozen=True, eq=False)
class FeshbachPartition:
    """Blocks of a Hamiltonian matrix split at indices ``n1 < n2``.

    ``php`` is the included block, ``qhq`` the excluded block, ``phq`` their
    coupling; whatever lies beyond ``n2`` is tracked only through the basis
    reference.
    """

    n1: int
    n2: int
    php: np.ndarray
    phq: np.ndarray
    qhq: np.ndarray
    basis: BasisSet

    def __post_init__(self):
        self.php.setflags(write=False)
        self.phq.setflags(write=False)
        self.qhq.setflags(write=False)


@dataclass(frozen=True, eq=False)
class EffectiveSolve:
    energy: float
    iterations: int
    history: np.ndarray
    p_state: np.ndarray

    def __post_init__(self):
        self.history.setflags(write=False)
        self.p_state.setflags(write=False)


def partition(h: OperatorMatrix, n1: int, n2: int) -> FeshbachPartition:
    """Extract included/excluded blocks from a Hamiltonian matrix."""
    n = h.n
    if not 1 <= n1 < n2 <= n:
        raise ValueError(f"need 1 <= n1 < n2 <= {n}, got n1={n1}, n2={n2}")
    entries = h.entries
    return FeshbachPartition(
        n1=n1,
        n2=n2,
        php=entries[:n1, :n1].copy(),
        phq=entries[:n1, n1:n2].copy(),
        qhq=entries[n1:n2, n1:n2].copy(),
        basis=h.basis,
    )


def _excluded_modes(part: FeshbachPartition):
    eigenvalues, vectors = jacobi_eigh(part.qhq)
    return eigenvalues, part.phq @ vectors


def _effective_from_modes(mode_values, coupled, energy: float) -> np.ndarray:
    gaps = energy - mode_values
    if np.abs(gaps).min() <= POLE_GUARD:
        pole = mode_values[np.argmin(np.abs(gaps))]
        raise ResolventPoleError(
            f"trial energy {energy:.12g} within {POLE_GUARD:g} of excluded-block "
            f"eigenvalue {pole:.12g}"
        )
    w = (coupled / gaps) @ coupled.T
    return (w + w.T) / 2.0


def effective_kernel(part: FeshbachPartition, energy: float) -> np.ndarray:
    """Energy-dependent correction ``B (E - Q)^{-1} B^T`` on the included block.

    The resolvent is applied through the spectral decomposition of the
    excluded block, which also provides the pole guard: energies within
    ``POLE_GUARD`` of an excluded eigenvalue are refused.
    """
    mode_values, coupled = _excluded_modes(part)
    return _effective_from_modes(mode_values, coupled, energy)


def solve_selfconsistent(
    part: FeshbachPartition, tol: float = 1e-10, max_iter: int = 200
) -> EffectiveSolve:
    """Fixed-point iteration ``E <- ground(P + W(E))`` seeded from ``ground(P)``.

    For a ground state below the excluded spectrum the iteration contracts;
    the converged energy equals the ground eigenvalue of the full retained
    block.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    mode_values, coupled = _excluded_modes(part)
    energy = float(eigen_symmetric(part.php).eigenvalues[0])
    history = [energy]
    p_state = None
    for iteration in range(1, max_iter + 1):
        w = _effective_from_modes(mode_values, coupled, energy)
        spectrum = eigen_symmetric(part.php + w)
        new_energy = float(spectrum.eigenvalues[0])
        history.append(new_energy)
        delta = abs(new_energy - energy)
        energy = new_energy
        p_state = spectrum.vectors[0]
        if delta < tol:
            return EffectiveSolve(
                energy=energy,
                iterations=iteration,
                history=np.array(history),
                p_state=p_state,
            )
    raise ConvergenceError(
        f"self-consistent energy not converged to {tol:g} after {max_iter} iterations"
    )


def render_effective(part: FeshbachPartition, energy: float, r_axis=None, s_axis=None) -> KernelGrid:
    """Coordinate-space kernel of the effective correction on the included block."""
    w = effective_kernel(part, energy)
    r_axis = default_axis(part.n1) if r_axis is None else np.asarray(r_axis, dtype=float)
    s_axis = r_axis if s_axis is None else np.asarray(s_axis, dtype=float)
    chi_r = evaluate_all(part.basis, r_axis)[: part.n1]
    chi_s = chi_r if s_axis is r_axis else evaluate_all(part.basis, s_axis)[: part.n1]
    return KernelGrid(r_axis, s_axis, chi_r.T @ w @ chi_s, KernelKind.EFFECTIVE)

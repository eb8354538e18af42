"""Finite-matrix representations of 1-D quantum-mechanical operators.

The package builds truncated expansion bases (oscillator functions,
translated Gaussians, symmetric Gaussian pairs), assembles operator matrices
in them, renders the resulting integral kernels with their crest/cut/weight
diagnostics, splits Hamiltonians into included/excluded blocks with the
exact energy-dependent correction, and checks everything against an
independent finite-difference solver.
"""

from .basis import (
    BasisSet,
    BasisSpec,
    DualBasis,
    Family,
    OrthoMethod,
    Parity,
    build_raw_family,
    dual_basis,
    evaluate,
    evaluate_all,
    hermite_function,
    orthonormalize,
    realize,
)
from .errors import (
    ContractViolationError,
    ConvergenceError,
    DegenerateInputError,
    IllConditionedBasisError,
    MatrepError,
    OutOfRangeError,
    OutsideTrustRegionError,
    QuadratureError,
    ResolutionError,
    ResolventPoleError,
    UnsupportedDegreeError,
)
from .feshbach import (
    EffectiveSolve,
    FeshbachPartition,
    effective_kernel,
    partition,
    render_effective,
    solve_selfconsistent,
)
from .kernels import (
    CurveLabel,
    CurveSeries,
    KernelGrid,
    KernelKind,
    christoffel_darboux,
    crest_and_cuts,
    crest_ratio,
    cut_weight,
    default_axis,
    dual_identity_kernel,
    projected_oscillator_compact,
    r2_kernel_compact,
    render_kernel,
)
from .operators import (
    OperatorKind,
    OperatorMatrix,
    PotentialSpec,
    QuadratureRule,
    QuadratureScheme,
    default_rule,
    gauss_hermite_rule,
    hamiltonian_matrix,
    kinetic_matrix,
    local_potential_matrix,
    position_squared_matrix,
    separable_matrix,
    separable_projection,
    trapezoid_rule,
)
from .oracle import OracleSolution, fd_ground_state, integrate
from .spectral import (
    PeakMetrics,
    SampledWave,
    Spectrum,
    eigen_symmetric,
    peak_metrics,
    synthesize,
)

__version__ = "0.1.0"

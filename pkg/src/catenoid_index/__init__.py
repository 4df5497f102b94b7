"""Numerical verification that the critical catenoid has free-boundary Morse index 4."""

from .errors import (
    CatenoidError,
    ChartMismatchError,
    DomainError,
    GramSingularError,
    InteriorSingularError,
    NonpositiveHError,
    NotSolvableError,
    ShiftSingularError,
    SingularBoundaryError,
    ZeroFunctionError,
)
from .fields import ClosedFormField, FieldKind, closed_form_field, evaluate, jacobi_residual, steklov_ratio
from .geometry import Chart, CriticalParams, Grid1D, chart_convert, critical_params, solve_critical_T
from .index_engine import (
    BoundaryMode,
    DirichletSolution,
    IndexReport,
    complement_positivity_check,
    disk_index,
    lower_bound_certificate,
    morse_index,
    sigma1_laplacian,
    solve_dirichlet,
    steklov_spectrum_J,
)
from .linalg_core import Inertia, TriMatrix, TriPencil, ldlt_inertia, pencil_count_below, pencil_eigs, steklov_reduce
from .quadratic_forms import FormKind, gram, q_bilinear, q_value, strict_gap_check
from .sturm_liouville import (
    BoundaryCondition,
    assemble,
    ground_state_certificate,
    legendre_substitution_check,
    mode_problem,
    qn_value,
)

__version__ = "0.1.0"

"""q4lab: numerical verification lab for the codimension-four quadratic center.

Everything here is desk-scale numerics: moment integrals over level ovals by
two independent quadratures, the six-equation Picard-Fuchs system and its
derived 2x2 systems, the operator chain I -> G = L1(I) -> R = L2(G), exact
extraction of the rational-function coefficients of R, Chebyshev-property
probes for L2, and argument-principle zero counting in the complex domain.
"""

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateLevelError,
    DomainError,
    GeometryError,
    PathProximityError,
    Q4Error,
    SingularityError,
    UnsupportedIndexError,
)
from .model import (
    ENDPOINT_EXCLUSION,
    HamiltonianForm,
    LevelPoint,
    ModelParams,
    Oval,
    Window,
    coordinate_map,
    critical_levels,
    h_from_s,
    hamiltonian,
    in_omega,
    interior_levels,
    level_classify,
    make_params,
    oval,
    real_roots_y,
    s_from_h,
)
from .quadrature import (
    MomentIndex,
    MomentValue,
    basis_values,
    curve_discriminant,
    moment,
    moment_value,
    residue_value,
)
from .reduction import (
    MomentCombination,
    assemble_I,
    inversion_check,
    moment_reduce,
    mu_G_from_eq211,
    recurrence_residual,
)
from .picard_fuchs import (
    JState,
    PFPropagation,
    PFVector,
    apply_L1,
    apply_L2,
    apply_s_operator,
    derivative_formulas,
    infinity_exponents,
    initial_jstate,
    pf_derivatives,
    pf_residuals,
    propagate,
    propagate_J,
)
from .melnikov import RCoefficients, eval_G, eval_R, extract_R_coeffs
from .analysis import (
    BoundReport,
    ChebyshevProbeReport,
    PolyPair,
    WindingReport,
    ZeroReport,
    bound_pipeline,
    chebyshev_probe,
    count_zeros,
    vn_sample_test,
    winding_count,
)
from .dynamics import (
    Orbit,
    conservation_report,
    integrate_orbit,
    vector_field_rhs,
)
from .cli import RunConfig, run

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

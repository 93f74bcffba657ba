"""D-optimal designs for paired comparisons of K two-level attributes.

The model has main effects plus first- and second-order interactions.
Invariant designs put weight on comparison depths (the number of
attributes in which the two alternatives differ). Their information
matrices are diagonal and come from closed forms. A brute-force oracle
rebuilds them from explicit pair enumeration.
"""
__version__ = "0.1.0"

from .errors import CapacityError, CertificationError, DomainError, SingularDesignError
from .measures import (
    DepthDesign,
    DiagonalInfo,
    ExactDesign,
    PairDesign,
    depth_to_pair_design,
    h_values,
    info_diagonal,
    info_matrix_full,
    log_det,
    realize_exact,
)
from .model import (
    ModelSpec,
    PairedComparison,
    Profile,
    comparison_depth,
    difference_vector,
    effect_code,
    enumerate_orbit,
    regression_vector,
)
from .optimality import (
    OptimalDesignResult,
    VarianceProfile,
    analytic_weight,
    conjecture_probe,
    d_optimal_design,
    kw_certify,
    optimal_depth_first_order,
    optimal_depth_main,
    optimal_depth_second_order,
    optimize_weights,
    variance_function,
    variance_single_depth,
)

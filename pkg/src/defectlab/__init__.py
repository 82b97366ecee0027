"""Exact-arithmetic laboratory for mixed vector systems and their defects."""

__version__ = "0.1.0"

from .exact import (
    BudgetExceeded,
    DependentGenerators,
    ExactMatrix,
    SparseVector,
    complement_basis,
    dist_sq,
    gram,
    intersect,
    project,
    project_coefficients,
    rank,
    rank_of_vectors,
)
from .families import (
    DefectPairFamily,
    E1PlusEkFamily,
    FiniteDefectSetFamily,
    InfiniteDefectSetFamily,
    MalformedDefectSet,
    RandomFiniteFamily,
    SystemFamily,
    UnsupportedFamily,
    YoungFamily,
    make_defect_pair,
    make_e1_plus_ek,
    make_finite_defect_set,
    make_infinite_defect_set,
    make_random_finite,
    make_young,
    parse_family,
)
from .indexsets import (
    EventuallyPeriodicSet,
    parse_set,
    prefix_agreement,
    rho,
    set_algebra,
    sigma_m,
    truncate,
)
from .mixed import (
    INCONCLUSIVE,
    DefectReport,
    MixedSelection,
    TooLarge,
    WrongSide,
    classify_defect,
    defect_truncated,
    distance_profile,
    hereditary_scan,
    mixed_vectors,
    swap_move,
    witness_check,
)
from .topology import (
    IntervalValue,
    NormalizedFamilyView,
    ZeroVector,
    convergence_probe,
    intersection_chain,
    metric_ds,
    metric_ds_to_zero,
    metric_dw,
    project_sigma,
    semicontinuity_probe,
    separation_bound,
    sqrt_enclosure,
)

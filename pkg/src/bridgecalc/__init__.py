"""bridgecalc: exact combinatorial calculus for weighted bridge surfaces."""

from .halfint import HalfInt
from .invariants import (
    InvariantBundle,
    VpcClass,
    classify_vpc,
    counting_identity_residual,
    delta_m,
    lens_shape_check,
    lower_bound_check,
    net_invariants,
    surface_x,
    surface_x_m,
)
from .model import (
    InvalidState,
    MoveError,
    PairState,
    Puncture,
    SurfaceRec,
    TangleData,
    ValidationReport,
    VpcRec,
    validate_state,
)
from .moves import (
    DiscSpec,
    Move,
    Outcome,
    SideSplit,
    amalgamate,
    apply_move,
    compare_complexity,
    complexity,
    consolidate,
    elementary_thinning,
    thin_driver,
    untelescope,
)
from .crush import (
    CrushSpec,
    crush,
    handle_crush_bound,
    omega_one_bound,
    satellite_bounds,
)
from .sums import (
    Attachment,
    SumSpec,
    additivity_bound,
    compose,
    cut_edge_reduce,
    decompose,
)
from .words import (
    AnnulusRec,
    AnnulusWord,
    classify_torus_config,
    detect_crushable,
    find_matched_pairs,
    is_cancellable,
    matching_length_parity,
    tube_and_tower_report,
)

__version__ = "0.1.0"

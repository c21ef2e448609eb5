"""Non-stationary fixed-point iteration and fractal construction.

Comparison-function contractions, forward/backward trajectories of map
sequences, Hutchinson/SFS/CIFS operators on discretised compact sets
under the Hausdorff metric, and fractal interpolation functions obtained
as backward-trajectory limits.
"""

from .comparison import (
    ComparisonChain,
    ComparisonFunction,
    Linear,
    PointwiseMax,
    RakotchFactor,
    RatioShift,
    chain_decays,
    chain_series_sum,
    compose_chain,
    verify_comparison,
)
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    InvalidInputError,
    NsfractalError,
    ResourceLimitError,
    SummabilityWarning,
)
from .fif import (
    FifOperatorStage,
    FifResult,
    GridFunction,
    InterpolationData,
    StageSequence,
    UniformGrid,
    apply_T,
    fif_backward,
    pl_interpolant,
    verify_matkowski,
)
from .maps import (
    Affine1D,
    Affine2D,
    Box,
    ContractiveMap,
    MapSequence,
    Mobius,
    Reciprocal,
    uniform_deviation,
    verify_contraction,
)
from .metric import (
    CompactSet,
    directed_distance,
    hausdorff_distance,
    metric_distance,
    read_points_csv,
    sample_box,
    sample_interval,
    write_points_csv,
)
from .raster import render_pgm, write_pgm
from .sfs import (
    CifsSystem,
    FunctionSystem,
    SfsSequence,
    check_set_lift,
    cifs_operator,
    hutchinson,
    sfs_backward,
    sfs_forward,
)
from .trajectories import (
    TrajectoryResult,
    asymptotically_similar,
    backward_trajectory,
    backward_value,
    forward_trajectory,
)

__version__ = "0.1.0"

"""Shrinking homeomorphisms for null, recursively starlike-equivalent planar scenes."""

from .errors import ShrinkError
from .geometry import (
    CompactSample,
    Disc,
    Point2,
    PullbackRegion,
    RadiusFunction,
    Region,
    RegionUnion,
    Segment,
    StarlikeSet,
    diameter,
    epsilon_net,
    hausdorff,
    probe_grid,
)
from .maps import (
    Affine,
    Composed,
    Conjugate,
    HomeoChain,
    Identity,
    PlanarMap,
    RadialMap,
    chain_from_spec,
    check_homeo,
    evaluate,
    inverse,
    map_from_spec,
    uniform_distance,
)
from .starlike import NullCollection, contains, eccentric_disc_radii, radial_squeeze
from .decomposition import (
    Decomposition,
    QuotientGraph,
    Scene,
    bing_check,
    check_usc,
    is_null,
    largest_saturated,
    project,
    quotient_distance,
    quotient_pseudometric,
    saturate,
)
from .reports import ElementOutcome, ShrinkReport, StepRecord, serialize_report
from .shrink import (
    Chart,
    RecursiveSet,
    RSEDecomposition,
    StageChart,
    StarlikeEquivalentSet,
    approximating_sequence,
    pad_filtration,
    shrink_null_se,
    shrink_recursive,
    shrink_se,
    transport_filtration,
)
from .scene_io import (
    SceneBundle,
    SceneParseError,
    assemble_scene,
    load_scene,
    parse_scene,
    parse_scene_text,
    serialize_scene,
)
from .svg import emit_frames, emit_svg, render_svg

__version__ = "0.1.0"

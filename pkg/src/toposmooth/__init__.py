"""Topology-preserving smoothing of 2D binary images.

Building blocks: digital topology on the square grid (simple points,
connectivity numbers, component labeling), exact squared Euclidean
distance transforms, ball morphology, constrained homotopic thinning and
thickening, the alternating cutting/filling smoothing filter, and a
zone-parallel runtime that executes the stability loops on a thread pool
without giving up the topology guarantees.
"""

from .edt import edt_brute, f, infinity, meijster, meijster_columns, meijster_rows, sed4, sep
from .grid import (
    CONN_48,
    CONN_84,
    ComponentLabeling,
    Connectivity,
    addable_mask,
    as_binary,
    boundary_length,
    connected_components,
    connectivity_number,
    is_addable,
    is_simple,
    neighbors,
    pattern_at,
    pattern_map,
    simple_lut,
    simple_mask,
    topology_signature,
)
from .homotopy import (
    ConstraintSets,
    SmoothingParams,
    StageReport,
    cutting,
    filling,
    hasf,
    salient_parts,
    thicken,
    thin,
)
from .morph import dilate, erode
from .netpbm import ImageFormatError, read_image, write_distance_map, write_image
from .runtime import (
    MergeQueue,
    ProtocolError,
    ProtocolTrace,
    ZonePlan,
    distribute,
    merge_run,
    parallel_smooth,
    parallel_thicken,
    parallel_thin,
    split,
)

__version__ = "0.1.0"

__all__ = [
    "CONN_48",
    "CONN_84",
    "ComponentLabeling",
    "Connectivity",
    "ConstraintSets",
    "ImageFormatError",
    "MergeQueue",
    "ProtocolError",
    "ProtocolTrace",
    "SmoothingParams",
    "StageReport",
    "ZonePlan",
    "addable_mask",
    "as_binary",
    "boundary_length",
    "connected_components",
    "connectivity_number",
    "cutting",
    "dilate",
    "distribute",
    "edt_brute",
    "erode",
    "f",
    "filling",
    "hasf",
    "infinity",
    "is_addable",
    "is_simple",
    "meijster",
    "meijster_columns",
    "meijster_rows",
    "merge_run",
    "neighbors",
    "parallel_smooth",
    "parallel_thicken",
    "parallel_thin",
    "pattern_at",
    "pattern_map",
    "read_image",
    "salient_parts",
    "sed4",
    "sep",
    "simple_lut",
    "simple_mask",
    "split",
    "thicken",
    "thin",
    "topology_signature",
    "write_distance_map",
    "write_image",
]

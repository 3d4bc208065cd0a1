"""Constant-time closest-center label prediction for sign-pattern systems.

The package pairs a hash-indexed search (cost independent of the number of
classes) with exact cosine-scan baselines, graph-based labeled-center
fallbacks, projected union systems, bit-exact persistence, a stream monitor
for unlabeled-center hits, and a benchmark harness.
"""

__version__ = "0.1.0"

from .classifier import (
    EmbeddingBatch,
    LabelMap,
    Prediction,
    build_label_map,
    closest_code,
    label_map_from_codes,
    predict,
    predict_labels,
    reconstruct_center,
)
from .errors import (
    BadMagicError,
    BadVersionError,
    InputError,
    IntegrityError,
    ParameterError,
    StoreError,
    TruncatedError,
)
from .estimators import (
    CenterHashClassifier,
    CosineScanClassifier,
    ProjectedUnionClassifier,
)
from .exact import CenterMatrix, cossim_argmax, matmul_head_argmax
from .graph_search import (
    PermGraphEdge,
    SortedQuery,
    basic_successors,
    closest_labeled,
    sink_vertex,
    sort_query,
    start_vertex,
    successor_edges,
)
from .monitor import Alert, UnlabeledMonitor
from .projection import (
    ProjectedParams,
    closest_in_union,
    predict_union,
    project,
    project_vector,
)
from .store import (
    load_batch,
    load_labels,
    load_map,
    save_batch,
    save_labels,
    save_map,
    stream_batches,
)
from .systems import (
    CenterCode,
    SystemParams,
    choose_min_dim,
    count_vectors,
    decode,
    encode,
    enumerate_centers,
    enumerate_codes,
    pack_code,
    unpack_code,
)

__all__ = [
    "Alert",
    "BadMagicError",
    "BadVersionError",
    "CenterCode",
    "CenterHashClassifier",
    "CenterMatrix",
    "CosineScanClassifier",
    "EmbeddingBatch",
    "InputError",
    "IntegrityError",
    "LabelMap",
    "ParameterError",
    "PermGraphEdge",
    "Prediction",
    "ProjectedParams",
    "ProjectedUnionClassifier",
    "SortedQuery",
    "StoreError",
    "SystemParams",
    "TruncatedError",
    "UnlabeledMonitor",
    "basic_successors",
    "build_label_map",
    "choose_min_dim",
    "closest_code",
    "closest_in_union",
    "closest_labeled",
    "cossim_argmax",
    "count_vectors",
    "decode",
    "encode",
    "enumerate_centers",
    "enumerate_codes",
    "label_map_from_codes",
    "load_batch",
    "load_labels",
    "load_map",
    "matmul_head_argmax",
    "pack_code",
    "predict",
    "predict_labels",
    "predict_union",
    "project",
    "project_vector",
    "reconstruct_center",
    "save_batch",
    "save_labels",
    "save_map",
    "sink_vertex",
    "sort_query",
    "start_vertex",
    "stream_batches",
    "successor_edges",
    "unpack_code",
]

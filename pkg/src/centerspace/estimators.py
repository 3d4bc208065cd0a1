"""Scikit-learn style estimators wrapping the functional search APIs.

All three classifiers implement fit/predict plus get_params/set_params, so
they drop into pipelines and grid searches. fit takes prototype vectors as
X and their integer labels as y; predict maps query embeddings to labels.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_embedding_batch, check_labels
from .classifier import build_label_map, predict_labels
from .errors import ParameterError
from .exact import CenterMatrix, cossim_argmax, matmul_head_argmax
from .graph_search import STRATEGIES, resolve_unlabeled
from .projection import predict_union, project, split_union_rows
from .systems import SystemParams


class CenterHashClassifier(BaseEstimator, ClassifierMixin):
    """Closest-center labels via index-pattern hashing, O(1) in class count.

    X rows passed to fit must be system vectors (exactly m entries +1 and k
    entries -1). predict returns -1 for queries whose nearest center is
    unlabeled unless ``fallback`` names a labeled-center search strategy.
    """

    def __init__(self, m=2, k=2, fallback=None):
        self.m = m
        self.k = k
        self.fallback = fallback

    def fit(self, X, y):
        X = np.asarray(X)
        if X.ndim != 2:
            raise ParameterError("X must be a 2-D array of center vectors")
        if self.fallback is not None and self.fallback not in STRATEGIES:
            raise ParameterError(f"fallback must be None or one of {STRATEGIES}")
        y = check_labels(y, X.shape[0])
        params = SystemParams(X.shape[1], self.m, self.k)
        self.label_map_ = build_label_map(X, y, params)
        self.classes_ = np.unique(y)
        return self

    def predict(self, X):
        X = check_embedding_batch(X, self.label_map_.params.n)
        labels = predict_labels(X, self.label_map_)
        if self.fallback is not None:
            labels = resolve_unlabeled(X, labels, self.label_map_, self.fallback)
        return labels


class CosineScanClassifier(BaseEstimator, ClassifierMixin):
    """Exact nearest-prototype baseline: full scan, cost linear in classes.

    metric "cosine" compares normalized similarities; "dot" reproduces a
    fully connected head (argmax of raw inner products).
    """

    def __init__(self, metric="cosine", block_rows=512, block_cols=4096):
        self.metric = metric
        self.block_rows = block_rows
        self.block_cols = block_cols

    def fit(self, X, y):
        if self.metric not in ("cosine", "dot"):
            raise ParameterError(f"unknown metric {self.metric!r}")
        X = check_embedding_batch(X)
        y = check_labels(y, X.shape[0])
        self.centers_ = CenterMatrix.from_rows(X)
        self.y_ = y
        self.classes_ = np.unique(y)
        return self

    def predict(self, X):
        fn = cossim_argmax if self.metric == "cosine" else matmul_head_argmax
        idx = fn(X, self.centers_, self.block_rows, self.block_cols)
        return self.y_[idx]


class ProjectedUnionClassifier(BaseEstimator, ClassifierMixin):
    """Closest-center search over a projected union of three subsystems.

    m and k describe the base system one dimension up; fit partitions the
    prototype rows by their sign counts into per-subsystem maps sharing one
    label space.
    """

    def __init__(self, m=2, k=2):
        self.m = m
        self.k = k

    def fit(self, X, y):
        X = np.asarray(X)
        if X.ndim != 2:
            raise ParameterError("X must be a 2-D array of union vectors")
        y = check_labels(y, X.shape[0])
        base = SystemParams(X.shape[1] + 1, self.m, self.k)
        self.projected_ = project(base)
        self.maps_ = split_union_rows(X, y, self.projected_)
        self.classes_ = np.unique(y)
        return self

    def predict(self, X):
        labels, _, _ = predict_union(X, self.maps_)
        return labels

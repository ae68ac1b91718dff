"""k-nearest-neighbour classifier over ULGFBP histograms (chi-square)."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import kernels
from ..errors import DimensionError, IngestionError


@dataclass
class KnnModel:
    features: np.ndarray
    labels: np.ndarray
    k: int = 1

    @property
    def n_features(self):
        return self.features.shape[1]


def chi_square(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.sum((a - b) ** 2 / (a + b + kernels.CHI2_EPS)))


def knn_fit(features, labels, k=1):
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    if len(features) == 0:
        raise ValueError("k-NN needs at least one training sample")
    if len(labels) != len(features):
        raise ValueError(f"{len(features)} feature vectors but {len(labels)} labels")
    if not 1 <= k <= len(features):
        raise ValueError(f"k must lie in [1, {len(features)}], got {k}")
    return KnnModel(features.copy(), labels.copy(), int(k))


def _vote(dist_row, labels, k):
    nearest = np.argsort(dist_row, kind="stable")[:k]
    classes = labels[nearest]
    votes = np.bincount(classes)
    best = votes.max()
    tied = np.flatnonzero(votes == best)
    if len(tied) == 1:
        return int(tied[0])
    # tie: smaller summed distance wins, then the smaller class index
    totals = [dist_row[nearest[classes == c]].sum() for c in tied]
    return int(tied[int(np.argmin(totals))])


def knn_predict_many(model, queries):
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != model.n_features:
        raise DimensionError(f"query has {queries.shape[1]} features, model expects {model.n_features}")
    dist = kernels.chi2_distances(queries, model.features)
    return np.array([_vote(row, model.labels, model.k) for row in dist], dtype=np.int64)


def knn_predict(model, query):
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1:
        raise DimensionError(f"expected one query vector, got shape {query.shape}")
    return int(knn_predict_many(model, query[None])[0])


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def save_knn(model, path, class_names, ids=None):
    """Feature CSV at ``path`` plus ``<path>.json`` holding k and class names."""
    from ..pipeline import write_feature_csv
    path = Path(path)
    if ids is None:
        ids = [f"s{i}" for i in range(len(model.labels))]
    write_feature_csv(path, ids, model.labels, model.features)
    meta = {"classifier": "knn", "k": model.k, "distance": "chi-square",
            "class_names": list(class_names), "n_features": model.n_features}
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_knn(path):
    from ..pipeline import read_feature_csv
    path = Path(path)
    try:
        meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IngestionError(f"cannot read k-NN sidecar ({exc})", sidecar_path(path)) from exc
    _, labels, feats = read_feature_csv(path)
    return knn_fit(feats, labels, meta["k"]), meta["class_names"]

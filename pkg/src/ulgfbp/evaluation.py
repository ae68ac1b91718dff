"""Stratified k-fold cross-validation, confusion matrices and metrics."""

import csv
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .classify import (ResidualNet, TrainConfig, TrainTrace, knn_fit,
                       knn_predict_many, train)

log = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "precision", "sensitivity", "f1")


# --------------------------------------------------------------------------
# folds


@dataclass
class FoldAssignment:
    folds: np.ndarray
    k: int
    seed: int

    def test_indices(self, fold):
        return np.flatnonzero(self.folds == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.folds != fold)


def stratified_kfold(labels, k=10, seed=0):
    """Shuffle each class with a seeded generator, then deal round-robin.

    The dealing position carries over from one class to the next so fold
    totals stay as even as the per-class counts allow.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    labels = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng(seed)
    folds = np.full(len(labels), -1, dtype=np.int64)
    start = 0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if len(idx) < k:
            warnings.warn(f"class {c} has {len(idx)} samples, fewer than {k} folds; "
                          "some folds will not contain it", stacklevel=2)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = (start + np.arange(len(idx))) % k
        start = (start + len(idx)) % k
    return FoldAssignment(folds, k, seed)


# --------------------------------------------------------------------------
# confusion / metrics


class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be non-negative")

    @property
    def n_classes(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def tp(self):
        return np.diag(self.counts).copy()

    @property
    def fp(self):
        return self.counts.sum(axis=0) - self.tp

    @property
    def fn(self):
        return self.counts.sum(axis=1) - self.tp

    @property
    def tn(self):
        return self.total - self.tp - self.fp - self.fn

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    def __repr__(self):
        return f"ConfusionMatrix({self.counts.tolist()})"


def confusion(preds, truth, n_classes):
    preds = np.asarray(preds, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape:
        raise ValueError(f"{preds.size} predictions but {truth.size} labels")
    for name, arr in (("prediction", preds), ("label", truth)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"{name} outside [0, {n_classes - 1}]")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (truth, preds), 1)
    return ConfusionMatrix(counts)


@dataclass
class MetricsReport:
    """Percentages.  Per-class arrays are one-vs-rest; ``macro_*`` their mean.

    ``accuracy`` is overall (trace / total).  ``undefined`` lists the
    ``(metric, class)`` pairs whose ratio was 0/0 and was reported as 0.
    """

    accuracy: float
    class_accuracy: np.ndarray
    precision: np.ndarray
    sensitivity: np.ndarray
    f1: np.ndarray
    undefined: list = field(default_factory=list)

    @property
    def macro_precision(self):
        return float(np.mean(self.precision))

    @property
    def macro_sensitivity(self):
        return float(np.mean(self.sensitivity))

    @property
    def macro_f1(self):
        return float(np.mean(self.f1))

    @property
    def macro_class_accuracy(self):
        return float(np.mean(self.class_accuracy))

    def summary(self):
        return {"accuracy": self.accuracy, "precision": self.macro_precision,
                "sensitivity": self.macro_sensitivity, "f1": self.macro_f1}


def _ratio(num, den, name, cls, undefined):
    if den == 0:
        undefined.append((name, cls))
        return 0.0
    return num / den


def metrics(cm):
    if cm.total == 0:
        raise ValueError("metrics of an empty confusion matrix")
    tp, tn, fp, fn = cm.tp, cm.tn, cm.fp, cm.fn
    undefined = []
    acc_c, prec, sens, f1 = [], [], [], []
    for c in range(cm.n_classes):
        acc_c.append(100.0 * (tn[c] + tp[c]) / (tn[c] + tp[c] + fn[c] + fp[c]))
        p = 100.0 * _ratio(tp[c], fp[c] + tp[c], "precision", c, undefined)
        s = 100.0 * _ratio(tp[c], fn[c] + tp[c], "sensitivity", c, undefined)
        prec.append(p)
        sens.append(s)
        f1.append(2.0 * _ratio(s * p, s + p, "f1", c, undefined))
    accuracy = 100.0 * np.trace(cm.counts) / cm.total
    return MetricsReport(float(accuracy), np.array(acc_c), np.array(prec),
                         np.array(sens), np.array(f1), undefined)


# --------------------------------------------------------------------------
# classifiers as seen by the harness


@dataclass
class KnnSpec:
    k: int = 1
    name: str = "knn"

    def fit_predict(self, x_train, y_train, x_test, n_classes, seed):
        model = knn_fit(x_train, y_train, self.k)
        return knn_predict_many(model, x_test), None


@dataclass
class ResnetSpec:
    train: TrainConfig = TrainConfig()
    head_depth: int = 1
    head_hidden: int = 32
    name: str = "resnet"

    def build(self, input_shape, n_classes, seed):
        return ResidualNet(n_classes, input_shape, self.head_depth, self.head_hidden, seed=seed)

    def fit_predict(self, x_train, y_train, x_test, n_classes, seed):
        x_train = np.asarray(x_train)
        net = self.build(x_train.shape[1:], n_classes, seed)
        cfg = TrainConfig(**{**self.train.__dict__, "seed": seed})
        net, trace = train(net, x_train, y_train, cfg)
        return net.predict(np.asarray(x_test)), trace


@dataclass
class FoldReport:
    index: int
    confusion: ConfusionMatrix
    metrics: MetricsReport
    trace: Optional[TrainTrace] = None


@dataclass
class CrossValidation:
    folds: list
    assignment: FoldAssignment

    def values(self, name):
        return np.array([f.metrics.summary()[name] for f in self.folds])

    def mean(self, name):
        return float(np.mean(self.values(name)))

    def std(self, name):
        return float(np.std(self.values(name)))

    def max(self, name):
        return float(np.max(self.values(name)))


class FoldError(RuntimeError):
    def __init__(self, fold, exc):
        self.fold = fold
        super().__init__(f"fold {fold}: {exc}")


def fold_seed(seed, fold):
    return int(np.random.SeedSequence([int(seed), int(fold)]).generate_state(1)[0])


def cross_validate(inputs, labels, spec, k=10, seed=0, n_classes=None, progress=None):
    """Fit on k-1 folds, predict the held-out one, for every fold."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise ValueError("cross-validation needs a non-empty dataset")
    n_classes = int(labels.max()) + 1 if n_classes is None else n_classes
    inputs = np.asarray(inputs)
    assignment = stratified_kfold(labels, k, seed)
    reports = []
    for f in range(k):
        tr, te = assignment.train_indices(f), assignment.test_indices(f)
        try:
            preds, trace = spec.fit_predict(inputs[tr], labels[tr], inputs[te], n_classes, fold_seed(seed, f))
        except Exception as exc:
            raise FoldError(f, exc) from exc
        cm = confusion(preds, labels[te], n_classes)
        reports.append(FoldReport(f, cm, metrics(cm), trace))
        if progress:
            progress(f, reports[-1])
    return CrossValidation(reports, assignment)


# --------------------------------------------------------------------------
# report files


def _fmt(v):
    return f"{v:.6f}"


def format_confusion(cm, class_names):
    names = [str(n) for n in class_names]
    cells = [[str(v) for v in row] for row in cm.counts]
    width = max([len(n) for n in names] + [len(c) for row in cells for c in row] + [len("true\\pred")])
    lines = [" ".join(s.rjust(width) for s in ["true\\pred"] + names)]
    for name, row in zip(names, cells):
        lines.append(" ".join(s.rjust(width) for s in [name] + row))
    return "\n".join(lines) + "\n"


def emit_reports(cv, class_names, out_dir):
    """Write metrics.csv, confusion_fold<i>.txt and curves_fold<i>.csv."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        header = (["fold"] + list(METRIC_NAMES) + [f"{m}_std" for m in METRIC_NAMES]
                  + ["accuracy_max", "undefined"])
        path = out / "metrics.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for f in cv.folds:
                s = f.metrics.summary()
                flags = ";".join(f"{m}:{c}" for m, c in f.metrics.undefined)
                w.writerow([f.index] + [_fmt(s[m]) for m in METRIC_NAMES]
                           + [""] * len(METRIC_NAMES) + ["", flags])
            w.writerow(["mean"] + [_fmt(cv.mean(m)) for m in METRIC_NAMES]
                       + [_fmt(cv.std(m)) for m in METRIC_NAMES]
                       + [_fmt(cv.max("accuracy")), ""])
        written.append(path)
        for f in cv.folds:
            path = out / f"confusion_fold{f.index}.txt"
            path.write_text(format_confusion(f.confusion, class_names), encoding="utf-8")
            written.append(path)
            path = out / f"curves_fold{f.index}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["iteration", "loss", "accuracy"])
                if f.trace is not None:
                    for it, lo, ac in zip(f.trace.iteration, f.trace.loss, f.trace.accuracy):
                        w.writerow([it, _fmt(lo), _fmt(ac)])
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write reports to {out}: {exc}") from exc
    return written

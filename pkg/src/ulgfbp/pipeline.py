"""End-to-end ULGFBP extraction, dataset ingestion and rotation balancing."""

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import imaging
from .errors import DimensionError, IngestionError
from .gabor import (DEFAULT_OMEGAS, DEFAULT_RADIUS_FACTOR, DEFAULT_THETAS,
                    build_filter_bank, gabor_magnitudes)
from .ulbp import MODES, LbpConfig, code_image, get_tables, region_histograms

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class PipelineConfig:
    resize: tuple = (256, 256)
    omegas: tuple = DEFAULT_OMEGAS
    thetas: tuple = DEFAULT_THETAS
    radius_factor: float = DEFAULT_RADIUS_FACTOR
    lbp: LbpConfig = LbpConfig()
    map_size: tuple = (224, 224)
    grid: int = 3
    mode: str = "u2"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if min(self.resize) < 1 or min(self.map_size) < 1:
            raise ValueError("resize and map sizes must be positive")
        if self.grid < 1:
            raise ValueError(f"grid must be >= 1, got {self.grid}")
        if min(self.resize) - 2 * self.lbp.radius < self.grid:
            raise ValueError(f"resize {self.resize} leaves too few LBP pixels for a {self.grid}x{self.grid} grid")

    @property
    def n_filters(self):
        return len(self.omegas) * len(self.thetas)

    @property
    def n_bins(self):
        return get_tables(self.lbp.sampling_points).n_bins(self.mode)

    @property
    def feature_dim(self):
        return self.n_filters * self.grid * self.grid * self.n_bins

    def bank(self):
        return build_filter_bank(self.omegas, self.thetas, self.radius_factor)


@dataclass
class UlgfbpFeature:
    histogram: np.ndarray
    map: np.ndarray
    source_id: str = ""


def compose_map(label_images, map_size=(224, 224), max_label=58):
    """Stack per-scale direction means into an ``(h, w, 3)`` map in [0, 1].

    ``label_images`` is scale-major: (s0,d0), (s0,d1), (s1,d0), ...
    ``map_size`` is ``(width, height)``.
    """
    if len(label_images) != 6:
        raise ValueError(f"expected 6 label images, got {len(label_images)}")
    shapes = {np.shape(li) for li in label_images}
    if len(shapes) != 1:
        raise DimensionError(f"label images differ in shape: {sorted(shapes)}")
    channels = []
    for s in range(3):
        pair = np.asarray(label_images[2 * s], np.float64) + np.asarray(label_images[2 * s + 1], np.float64)
        channels.append(pair / (2.0 * max_label))
    stacked = np.stack(channels, axis=-1)
    out = imaging.resize_float(stacked, map_size[0], map_size[1])
    return np.clip(out, 0.0, 1.0)


def extract_ulgfbp(img, cfg=PipelineConfig(), bank=None, source_id=""):
    """Histogram (filter-major, region-major, bin-minor) plus network map."""
    img = np.asarray(img)
    if img.ndim == 3:
        img = imaging.to_grayscale(img)
    if img.ndim != 2 or img.size == 0:
        raise DimensionError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if bank is None:
        bank = cfg.bank()
    norm = imaging.preprocess(img, cfg.resize[0], cfg.resize[1])
    n_bins = cfg.n_bins
    labels = [code_image(g, cfg.lbp, cfg.mode) for g in gabor_magnitudes(norm, bank)]
    hist = np.concatenate([region_histograms(li, n_bins, cfg.grid).ravel() for li in labels])
    fmap = compose_map(labels, cfg.map_size, max_label=n_bins - 1)
    return UlgfbpFeature(hist, fmap, source_id)


# --------------------------------------------------------------------------
# datasets


@dataclass
class Sample:
    id: str
    label: int
    path: Optional[Path] = None
    raster: Optional[np.ndarray] = field(default=None, repr=False)
    rotation: int = 0  # quarter turns, counter-clockwise

    def load(self):
        if self.raster is not None:
            img = np.asarray(self.raster)
        else:
            from .imageio import read_gray
            img = read_gray(self.path)
        if img.ndim == 3:
            img = imaging.to_grayscale(img)
        return np.rot90(img, self.rotation) if self.rotation else img


@dataclass
class LabeledDataset:
    samples: list
    class_names: list

    def __len__(self):
        return len(self.samples)

    @property
    def labels(self):
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def counts(self):
        return np.bincount(self.labels, minlength=len(self.class_names)).tolist()


def load_dataset(root):
    """Read ``root/<ClassName>/*.{png,jpg,jpeg}``; classes sorted by name."""
    root = Path(root)
    if not root.is_dir():
        raise IngestionError("dataset root is not a directory", root)
    entries = sorted(root.iterdir(), key=lambda p: p.name)
    stray = [p for p in entries if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS]
    if stray:
        raise IngestionError("image outside any class folder", stray[0])
    class_dirs = [p for p in entries if p.is_dir()]
    if not class_dirs:
        raise IngestionError("no class folders found", root)
    samples = []
    for label, cdir in enumerate(class_dirs):
        files = sorted((p for p in cdir.iterdir()
                        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS),
                       key=lambda p: p.name)
        if not files:
            raise IngestionError("class folder holds no images", cdir)
        samples.extend(Sample(f"{cdir.name}/{f.name}", label, path=f) for f in files)
    return LabeledDataset(samples, [d.name for d in class_dirs])


@dataclass
class BalanceReport:
    original_counts: list
    final_counts: list
    repeated: list  # class names that needed duplicate 90 degree rotations

    @property
    def exact(self):
        return not self.repeated


def balance_by_rotation(ds):
    """Top minority classes up to the majority count with right-angle rotations.

    New samples cycle 90, 180, 270 degrees over the class's originals in
    order.  Past 4x the originals, further 90 degree copies of successive
    samples are added and the class is listed in the report.
    """
    counts = ds.counts()
    if any(c == 0 for c in counts):
        empty = [n for n, c in zip(ds.class_names, counts) if c == 0]
        raise ValueError(f"classes without samples: {empty}")
    target = max(counts)
    out = list(ds.samples)
    repeated = []
    for label, name in enumerate(ds.class_names):
        originals = [s for s in ds.samples if s.label == label]
        need = target - len(originals)
        if need <= 0:
            continue
        added = []
        for turns in (1, 2, 3):
            for s in originals:
                if len(added) == need:
                    break
                added.append(_rotated(s, turns, f"#rot{90 * turns}"))
        extra = 0
        while len(added) < need:
            s = originals[extra % len(originals)]
            added.append(_rotated(s, 1, f"#rot90.{extra // len(originals) + 1}"))
            extra += 1
        if extra:
            repeated.append(name)
            log.warning("class %s: %d duplicate rotations needed to reach %d samples",
                        name, extra, target)
        out.extend(added)
    balanced = LabeledDataset(out, list(ds.class_names))
    return balanced, BalanceReport(counts, balanced.counts(), repeated)


def _rotated(sample, turns, suffix):
    return Sample(sample.id + suffix, sample.label, sample.path, sample.raster,
                  (sample.rotation + turns) % 4)


# --------------------------------------------------------------------------
# batch extraction

_worker_state = {}


def _init_worker(cfg):
    _worker_state["cfg"] = cfg
    _worker_state["bank"] = cfg.bank()


def _extract_one(sample):
    cfg = _worker_state["cfg"]
    return extract_ulgfbp(sample.load(), cfg, _worker_state["bank"], sample.id)


def extract_dataset(ds, cfg=PipelineConfig(), jobs=1, progress=None):
    """Features for every sample, in dataset order regardless of ``jobs``."""
    jobs = max(1, int(jobs or 1))
    if jobs == 1 or len(ds) < 2:
        _init_worker(cfg)
        feats = []
        for i, s in enumerate(ds.samples):
            feats.append(_extract_one(s))
            if progress:
                progress(i + 1, len(ds))
        return feats
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(cfg,)) as ex:
        feats = []
        for i, f in enumerate(ex.map(_extract_one, ds.samples, chunksize=4)):
            feats.append(f)
            if progress:
                progress(i + 1, len(ds))
        return feats


def default_jobs():
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# feature CSV


def write_feature_csv(path, ids, labels, histograms):
    histograms = np.asarray(histograms, dtype=np.float64)
    n = histograms.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"] + [f"f{i}" for i in range(n)])
        for sid, lab, row in zip(ids, labels, histograms):
            w.writerow([sid, int(lab)] + [format(v, ".9g") for v in row])


def read_feature_csv(path):
    """Return ``(ids, labels, histograms)`` from a feature CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if not header or header[:2] != ["id", "label"]:
            raise IngestionError("not a feature CSV", path)
        ids, labels, rows = [], [], []
        for row in r:
            ids.append(row[0])
            labels.append(int(row[1]))
            rows.append([float(v) for v in row[2:]])
    hist = np.array(rows, dtype=np.float64).reshape(len(rows), len(header) - 2)
    return ids, np.array(labels, dtype=np.int64), hist

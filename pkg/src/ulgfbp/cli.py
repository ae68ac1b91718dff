"""ulgfbp command line: extract, train, eval, selfcheck.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 internal
error or failed self-check.  Progress goes to stderr; results go to files
and stdout.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .errors import ConfigError, DimensionError, IngestionError

log = logging.getLogger("ulgfbp")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _progress(label):
    def report(done, total):
        print(f"\r{label} {done}/{total}", end="\n" if done == total else "",
              file=sys.stderr, flush=True)
    return report


def _folds(text):
    k = int(text)
    if k < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 folds, got {k}")
    return k


def _jobs(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"jobs must be >= 0, got {n}")
    return n


def build_parser():
    ap = _Parser(prog="ulgfbp", description="Gabor + uniform LBP texture features and classifiers.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="write the feature CSV (and optional map PNGs)")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--maps", type=Path)
    p.add_argument("--config", type=Path)
    p.add_argument("--jobs", type=_jobs)

    p = sub.add_parser("train", help="balance, extract and fit a classifier")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--classifier", required=True, choices=("knn", "resnet"))
    p.add_argument("--config", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=_jobs)

    p = sub.add_parser("eval", help="stratified k-fold cross-validation")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--classifier", required=True, choices=("knn", "resnet"))
    p.add_argument("--folds", type=_folds)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--config", type=Path)
    p.add_argument("--jobs", type=_jobs)

    sub.add_parser("selfcheck", help="run the embedded oracle suites")
    return ap


def _config(args):
    overrides = {k: getattr(args, k, None) for k in ("seed", "folds", "jobs")}
    return load_config(getattr(args, "config", None), overrides)


def _load(root):
    from .pipeline import load_dataset
    ds = load_dataset(root)
    print(f"{len(ds)} images in {len(ds.class_names)} classes: "
          + ", ".join(f"{n}={c}" for n, c in zip(ds.class_names, ds.counts())),
          file=sys.stderr)
    return ds


def _extract(ds, cfg):
    from .pipeline import extract_dataset
    return extract_dataset(ds, cfg.pipeline(), jobs=cfg.worker_count(),
                           progress=_progress("extract"))


def map_png_path(maps_dir, sample_id):
    """``<maps>/<Class>/<stem>.png``, keeping any rotation suffix in the stem."""
    cls, _, name = sample_id.partition("/")
    base, sep, suffix = name.partition("#")
    return Path(maps_dir) / cls / f"{Path(base).stem}{sep}{suffix}.png"


def cmd_extract(args):
    from .imageio import to_uint8, write_png
    from .pipeline import write_feature_csv
    cfg = _config(args)
    ds = _load(args.data)
    feats = _extract(ds, cfg)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_feature_csv(args.out, [s.id for s in ds.samples], ds.labels,
                      [f.histogram for f in feats])
    if args.maps is not None:
        for s, f in zip(ds.samples, feats):
            write_png(map_png_path(args.maps, s.id), to_uint8(f.map))
    print(f"wrote {len(feats)} feature rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_train(args):
    from .classify import ResidualNet, knn_fit, save_knn, save_model, train
    from .pipeline import balance_by_rotation
    cfg = _config(args)
    ds, report = balance_by_rotation(_load(args.data))
    if report.repeated:
        print("warning: duplicate rotations used for " + ", ".join(report.repeated), file=sys.stderr)
    feats = _extract(ds, cfg)
    args.model.parent.mkdir(parents=True, exist_ok=True)
    if args.classifier == "knn":
        model = knn_fit(np.stack([f.histogram for f in feats]), ds.labels, cfg.knn_k)
        save_knn(model, args.model, ds.class_names, [s.id for s in ds.samples])
        print(f"knn k={cfg.knn_k}: {len(ds)} reference samples, 0 training iterations")
        return EXIT_OK
    maps = np.stack([f.map for f in feats])
    del feats
    net = ResidualNet(len(ds.class_names), maps.shape[1:], cfg.head_depth,
                      cfg.head_hidden, seed=cfg.seed)

    def progress(epoch, t, loss, acc):
        print(f"\repoch {epoch + 1} iter {t} loss {loss:.4f} acc {acc:.3f}",
              end="", file=sys.stderr, flush=True)

    net, trace = train(net, maps, ds.labels, cfg.train(), progress)
    print(file=sys.stderr)
    save_model(net, args.model)
    last = trace.n_epochs - 1
    print(f"final epoch loss {trace.epoch_mean('loss', last):.6f} "
          f"accuracy {trace.epoch_mean('accuracy', last):.6f} ({len(trace)} iterations)")
    return EXIT_OK


def cmd_eval(args):
    from .evaluation import KnnSpec, ResnetSpec, cross_validate, emit_reports
    cfg = _config(args)
    ds = _load(args.data)
    feats = _extract(ds, cfg)
    if args.classifier == "knn":
        inputs = np.stack([f.histogram for f in feats])
        spec = KnnSpec(cfg.knn_k)
    else:
        inputs = np.stack([f.map for f in feats])
        spec = ResnetSpec(cfg.train(), cfg.head_depth, cfg.head_hidden)
    del feats

    def progress(fold, rep):
        print(f"fold {fold}: accuracy {rep.metrics.accuracy:.2f}%", file=sys.stderr)

    cv = cross_validate(inputs, ds.labels, spec, cfg.folds, cfg.seed,
                        len(ds.class_names), progress)
    try:
        emit_reports(cv, ds.class_names, args.out)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    print(f"mean accuracy {cv.mean('accuracy'):.6f}")
    return EXIT_OK


def cmd_selfcheck(args):
    from .selfcheck import run_selfcheck
    results = run_selfcheck(os.environ.get("ULGFBP_SELFCHECK_FAULT") or None)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail} [{r.seconds:.2f}s]")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("selfcheck failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


COMMANDS = {"extract": cmd_extract, "train": cmd_train, "eval": cmd_eval,
            "selfcheck": cmd_selfcheck}


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s",
                        stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestionError, DimensionError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help / --version
        return exc.code or EXIT_OK
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

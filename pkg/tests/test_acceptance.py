"""End-to-end acceptance gate; one pass/fail line per criterion is printed in the summary."""

import time
from fractions import Fraction

import numpy as np
import pytest

from oracles import numeric_gradient, per_sample_metrics, transitions
from ulgfbp.classify import (ResidualNet, TrainConfig, cross_entropy,
                             save_model, train)
from ulgfbp.evaluation import (ConfusionMatrix, KnnSpec, cross_validate,
                               emit_reports, metrics, stratified_kfold)
from ulgfbp.gabor import apply_gabor, build_filter_bank
from ulgfbp.pipeline import (PipelineConfig, balance_by_rotation,
                             extract_dataset, extract_ulgfbp, load_dataset,
                             write_feature_csv)
from ulgfbp.synthetic import write_corpus
from ulgfbp.ulbp import build_tables, is_uniform, uniformity

crit = pytest.mark.criterion


@crit(1, "ULBP tables: 58 uniform, 59 u2 labels, 10 riu2 labels, brute-force match, < 1 s")
def test_c1_ulbp_tables():
    t0 = time.perf_counter()
    t = build_tables(8)
    brute_u = [transitions(format(p, "08b")) for p in range(256)]
    uniform = [p for p in range(256) if brute_u[p] <= 2]
    assert t.uniformity.tolist() == brute_u
    assert len(uniform) == 58
    assert len(set(t.u2_label.tolist())) == 59
    assert [int(t.u2_label[p]) for p in uniform] == list(range(58))
    assert len(set(t.riu2_label.tolist())) == 10
    assert time.perf_counter() - t0 < 1.0


@crit(2, "pattern 01000000 has uniformity 2 and is uniform")
def test_c2_transition_example():
    assert uniformity(0b01000000) == 2
    assert is_uniform(0b01000000)


@crit(3, "Gabor DC suppression < 1e-3 for the 6 default kernels, < 5 s")
def test_c3_gabor_dc():
    t0 = time.perf_counter()
    bank = build_filter_bank()
    assert len(bank) == 6
    value = 10.0
    img = np.full((48, 48), value)
    for k in bank:
        resp = np.abs(apply_gabor(img, k)).max()
        assert resp < 1e-3 * value * np.abs(k.values).max(), k.params
    assert time.perf_counter() - t0 < 5.0


@crit(4, "FFT and direct convolution agree within 1e-6 on 20 random 32x32 images per kernel")
def test_c4_fft_vs_direct():
    rng = np.random.default_rng(2024)
    for k in build_filter_bank():
        for _ in range(20):
            img = rng.random((32, 32)) * 255
            a = apply_gabor(img, k, "fft")
            b = apply_gabor(img, k, "direct")
            assert np.linalg.norm(a - b) / np.linalg.norm(b) < 1e-6


@crit(5, "backprop matches central differences within 1e-4 on 8x8 inputs, 5 seeds, < 2 min")
def test_c5_gradients():
    t0 = time.perf_counter()
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        net = ResidualNet(3, (8, 8, 3), seed=seed)
        x = rng.random((4, 8, 8, 3))
        t = rng.integers(0, 3, 4)
        probs, cache = net.forward(x)
        analytic = net.backward(cache, t)
        numeric = numeric_gradient(lambda: cross_entropy(net.forward(x)[0], t), net.params)
        for name in net.params:
            a, n = analytic[name], numeric[name]
            rel = np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), 1e-300)
            assert rel < 1e-4, (seed, name, rel)
    assert time.perf_counter() - t0 < 120


@crit(6, "metric formulas match a per-sample rational counter on 100 random confusion matrices")
def test_c6_metrics():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(2, 5))
        counts = rng.integers(0, 1001, (n, n))
        if counts.sum() == 0:
            counts[0, 0] = 1
        truth = np.repeat(np.repeat(np.arange(n), n), counts.ravel()).tolist()
        preds = np.repeat(np.tile(np.arange(n), n), counts.ravel()).tolist()
        m = metrics(ConfusionMatrix(counts))
        overall, per_class = per_sample_metrics(preds, truth, n)
        assert isinstance(overall, Fraction)
        assert abs(m.accuracy - float(overall)) <= 1e-9
        for c, (acc, prec, sens, f1) in enumerate(per_class):
            assert abs(m.class_accuracy[c] - float(acc)) <= 1e-9
            assert abs(m.precision[c] - float(prec)) <= 1e-9
            assert abs(m.sensitivity[c] - float(sens)) <= 1e-9
            assert abs(m.f1[c] - float(f1)) <= 1e-9


@crit(7, "per-class fold counts differ by <= 1 over 100 random label multisets, k=10")
def test_c7_stratification():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n_classes = int(rng.integers(1, 6))
        labels = np.repeat(np.arange(n_classes), rng.integers(10, 200, n_classes))
        rng.shuffle(labels)
        fa = stratified_kfold(labels, 10, seed=int(rng.integers(0, 2**31)))
        for c in range(n_classes):
            per_fold = np.bincount(fa.folds[labels == c], minlength=10)
            assert per_fold.max() - per_fold.min() <= 1


# -- scaled end-to-end ------------------------------------------------------

def end_to_end(root, seed=0):
    """Corpus -> features -> k-NN 10-fold CV -> residual net; writes every artifact under ``root``."""
    t0 = time.perf_counter()
    data = write_corpus(root / "corpus", per_class=60, size=64, seed=seed)
    ds = load_dataset(data)
    cfg = PipelineConfig()
    feats = extract_dataset(ds, cfg, jobs=1)
    hist = np.stack([f.histogram for f in feats])
    write_feature_csv(root / "features.csv", [s.id for s in ds.samples], ds.labels, hist)
    cv = cross_validate(hist, ds.labels, KnnSpec(1), k=10, seed=seed, n_classes=3)
    emit_reports(cv, ds.class_names, root / "reports")

    ds_bal, report = balance_by_rotation(ds)
    assert len(ds_bal) == len(ds)  # already balanced, rotations not needed
    maps = np.stack([f.map for f in feats])
    del feats
    net = ResidualNet(3, maps.shape[1:], seed=seed)
    net, trace = train(net, maps, ds.labels, TrainConfig(seed=seed))
    save_model(net, root / "model.ulgf")
    train_acc = float(np.mean(net.predict(maps) == ds.labels))
    return {
        "knn_mean": cv.mean("accuracy"),
        "loss_first": trace.epoch_mean("loss", 0),
        "loss_last": trace.epoch_mean("loss", trace.n_epochs - 1),
        "train_acc": train_acc,
        "seconds": time.perf_counter() - t0,
    }


@pytest.fixture(scope="module")
def run_a(tmp_path_factory):
    root = tmp_path_factory.mktemp("run_a")
    return root, end_to_end(root)


@crit(8, "synthetic corpus: k-NN 10-fold mean accuracy >= 90%, resnet loss drops and train accuracy >= 80%, < 15 min")
def test_c8_knn(run_a):
    _, res = run_a
    print(f"k-NN mean accuracy {res['knn_mean']:.2f}%")
    assert res["knn_mean"] >= 90.0
    assert res["seconds"] < 15 * 60


@crit(8, "synthetic corpus: k-NN 10-fold mean accuracy >= 90%, resnet loss drops and train accuracy >= 80%, < 15 min")
def test_c8_resnet_loss_decreases(run_a):
    _, res = run_a
    print(f"epoch mean loss {res['loss_first']:.6f} -> {res['loss_last']:.6f}")
    assert res["loss_last"] < res["loss_first"]


@crit(8, "synthetic corpus: k-NN 10-fold mean accuracy >= 90%, resnet loss drops and train accuracy >= 80%, < 15 min")
def test_c8_resnet_train_accuracy(run_a):
    _, res = run_a
    print(f"resnet training accuracy {100 * res['train_acc']:.1f}%")
    assert res["train_acc"] >= 0.80


@crit(9, "two seeded end-to-end runs give byte-identical features, model and reports")
def test_c9_determinism(run_a, tmp_path):
    root_a, _ = run_a
    end_to_end(tmp_path)
    names = ["features.csv", "model.ulgf"] + [f"reports/{p.name}" for p in sorted((root_a / "reports").iterdir())]
    assert len(names) == 2 + 21
    for name in names:
        assert (root_a / name).read_bytes() == (tmp_path / name).read_bytes(), name


@crit(10, "default histogram length 3186 with every 59-bin segment L1-normalized within 1e-9")
def test_c10_feature_geometry():
    rng = np.random.default_rng(10)
    img = rng.integers(0, 256, (100, 130), dtype=np.uint8)
    h = extract_ulgfbp(img, PipelineConfig()).histogram
    assert h.shape == (3186,) == (6 * 9 * 59,)
    seg = h.reshape(54, 59)
    assert np.abs(seg.sum(axis=1) - 1).max() <= 1e-9
    assert (seg >= 0).all()

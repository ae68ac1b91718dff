"""Embedded oracle suites run by ``ulgfbp selfcheck``.

Each check recomputes its reference by an independent route (string bit
rotation, direct spatial convolution, central finite differences) and
compares against the production code path.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import gabor, ulbp
from .classify.network import ResidualNet

FD_STEP = 1e-6
GRAD_TOL = 1e-4
DC_TOL = 1e-3
CONV_TOL = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


# --------------------------------------------------------------------------
# oracles


def brute_uniformity(pattern, sp=8):
    bits = format(pattern, f"0{sp}b")
    return sum(bits[i] != bits[(i + 1) % sp] for i in range(sp))


def brute_tables(sp=8):
    """Uniformity, u2 and riu2 labels from string manipulation alone."""
    u = [brute_uniformity(p, sp) for p in range(1 << sp)]
    uniform = [p for p in range(1 << sp) if u[p] <= 2]
    rank = {p: i for i, p in enumerate(sorted(uniform))}
    u2 = [rank.get(p, len(uniform)) for p in range(1 << sp)]
    riu2 = [format(p, "b").count("1") if u[p] <= 2 else sp + 1 for p in range(1 << sp)]
    return np.array(u), np.array(u2), np.array(riu2)


def relative_error(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(a - b) / scale)


def finite_difference_grads(net, x, targets, step=FD_STEP):
    grads = {}
    for name, p in net.params.items():
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            lp = net.loss(x, targets)
            flat[i] = orig - step
            lm = net.loss(x, targets)
            flat[i] = orig
            gf[i] = (lp - lm) / (2 * step)
        grads[name] = g
    return grads


# --------------------------------------------------------------------------
# checks


def check_ulbp_tables(tables=None):
    tables = ulbp.build_tables(8) if tables is None else tables
    u, u2, riu2 = brute_tables(8)
    problems = []
    if not np.array_equal(tables.uniformity, u):
        problems.append("uniformity")
    if not np.array_equal(tables.u2_label, u2):
        problems.append("u2 labels")
    if not np.array_equal(tables.riu2_label, riu2):
        problems.append("riu2 labels")
    n_uniform = int(np.count_nonzero(u <= 2))
    if n_uniform != 58 or len(np.unique(tables.u2_label)) != 59:
        problems.append(f"{n_uniform} uniform patterns / {len(np.unique(tables.u2_label))} u2 labels")
    if len(np.unique(tables.riu2_label)) != 10:
        problems.append(f"{len(np.unique(tables.riu2_label))} riu2 labels")
    if problems:
        return False, "mismatch in " + ", ".join(problems)
    return True, "256 patterns: 58 uniform, 59 u2 labels, 10 riu2 labels"


def check_gabor_dc(bank=None, value=1.0, size=16):
    bank = gabor.build_filter_bank() if bank is None else bank
    img = np.full((size, size), value)
    worst = 0.0
    for k in bank:
        resp = np.abs(gabor.apply_gabor(img, k)).max()
        worst = max(worst, resp / (value * np.abs(k.values).max()))
    return worst < DC_TOL, f"max DC leakage ratio {worst:.2e} (limit {DC_TOL:g})"


def check_fft_vs_direct(bank=None, n_images=2, size=32, seed=0):
    bank = gabor.build_filter_bank() if bank is None else bank
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_images):
        img = rng.random((size, size))
        for k in bank:
            worst = max(worst, relative_error(gabor.apply_gabor(img, k, "fft"),
                                              gabor.apply_gabor(img, k, "direct")))
    return worst < CONV_TOL, f"max relative Frobenius error {worst:.2e} (limit {CONV_TOL:g})"


def gradient_errors(seed=0, n=4, size=8, n_classes=3, head_depth=1):
    rng = np.random.default_rng(seed)
    net = ResidualNet(n_classes, (size, size, 3), head_depth=head_depth, seed=seed)
    x = rng.random((n, size, size, 3))
    t = rng.integers(0, n_classes, n)
    probs, cache = net.forward(x)
    analytic = net.backward(cache, t)
    numeric = finite_difference_grads(net, x, t)
    return {k: relative_error(analytic[k], numeric[k]) for k in net.params}


def check_gradients(seed=0):
    errs = gradient_errors(seed)
    worst = max(errs, key=errs.get)
    return errs[worst] < GRAD_TOL, f"worst tensor {worst}: relative error {errs[worst]:.2e} (limit {GRAD_TOL:g})"


def run_selfcheck(fault=None):
    """Run all suites.  ``fault="ulbp-table"`` corrupts the u2 table (test hook)."""
    tables = None
    if fault == "ulbp-table":
        good = ulbp.build_tables(8)
        bad = good.u2_label.copy()
        bad[[0, 1]] = bad[[1, 0]]
        tables = ulbp.UlbpTables(8, good.uniformity, bad, good.riu2_label)
    elif fault:
        raise ValueError(f"unknown fault {fault!r}")
    suites = [
        ("ulbp-table", lambda: check_ulbp_tables(tables)),
        ("gabor-dc", check_gabor_dc),
        ("fft-vs-direct", check_fft_vs_direct),
        ("gradient", check_gradients),
    ]
    results = []
    for name, fn in suites:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # an oracle crash is a failure, not a traceback
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results

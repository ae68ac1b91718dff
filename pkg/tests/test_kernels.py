import os
import subprocess
import sys

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ulgfbp import kernels


@given(arrays(np.float64, st.tuples(st.integers(5, 16), st.integers(5, 16)),
              elements=st.integers(0, 5).map(float)), st.sampled_from([1, 2]))
def test_lbp_codes_paths_agree(img, r):
    a = kernels.lbp_codes_numba(img, r)
    b = kernels.lbp_codes_numpy(img, r)
    assert a.dtype == b.dtype == np.int64
    assert np.array_equal(a, b)


@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**31))
def test_convolve_paths_agree(r, extra, seed):
    rng = np.random.default_rng(seed)
    k = rng.standard_normal((2 * r + 1, 2 * r + 1)) + 1j * rng.standard_normal((2 * r + 1, 2 * r + 1))
    padded = rng.standard_normal((2 * r + extra + 3, 2 * r + extra))
    np.testing.assert_allclose(kernels.convolve_valid_numba(padded, k),
                               kernels.convolve_valid_numpy(padded, k), atol=1e-12)


def test_convolve_is_true_convolution():
    padded = np.zeros((5, 5))
    padded[2, 2] = 1.0
    k = np.arange(9, dtype=complex).reshape(3, 3)
    # an impulse reproduces the kernel unflipped
    assert np.array_equal(kernels.convolve_valid_numpy(padded, k), k)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 20), st.integers(0, 2**31))
def test_chi2_paths_agree(nq, nt, d, seed):
    rng = np.random.default_rng(seed)
    q = rng.random((nq, d)) * (rng.random((nq, d)) > 0.3)
    t = rng.random((nt, d)) * (rng.random((nt, d)) > 0.3)
    a = kernels.chi2_distances_numba(q, t)
    b = kernels.chi2_distances_numpy(q, t)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)
    for i in range(nq):
        for j in range(nt):
            ref = sum((x - y) ** 2 / (x + y + kernels.CHI2_EPS) for x, y in zip(q[i], t[j]))
            assert abs(a[i, j] - ref) <= 1e-12 * max(1, ref)


def test_env_flag_selects_numpy():
    code = "from ulgfbp import kernels; print(kernels.backend(), kernels.lbp_codes is kernels.lbp_codes_numpy)"
    env = dict(os.environ, ULGFBP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]
    env["ULGFBP_DISABLE_NUMBA"] = ""
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numba", "False"]


def test_benchmark_script_smoke(capsys):
    import runpy
    from pathlib import Path
    bench = runpy.run_path(str(Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"))
    bench["main"](["--repeat", "1", "--size", "32"])
    out = capsys.readouterr().out
    assert out.count("x\n") == 4

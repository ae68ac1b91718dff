import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import convolve_symmetric, gabor_sample
from ulgfbp.errors import DimensionError
from ulgfbp.gabor import (GaborParams, apply_bank, apply_gabor,
                          build_filter_bank, gabor_kernel, gabor_magnitudes,
                          magnitude)

BANK = build_filter_bank()
omegas = st.floats(0.2, 3.0)
thetas = st.floats(0, 2 * math.pi)


@given(omegas, thetas)
def test_centre_sample_closed_form(w, t):
    k = gabor_kernel(GaborParams(w, t), 3)
    expect = w * w / (2 * math.pi ** 3) * (1 - math.exp(-math.pi ** 2 / 2))
    assert k.values[3, 3].imag == pytest.approx(0, abs=1e-15)
    assert k.values[3, 3].real == pytest.approx(expect, rel=1e-12)


@given(omegas, thetas, st.integers(1, 6))
def test_kernel_matches_scalar_formula(w, t, r):
    k = gabor_kernel(GaborParams(w, t), r)
    for row in range(2 * r + 1):
        for col in range(2 * r + 1):
            # x runs along columns, y along rows
            ref = gabor_sample(w, t, col - r, row - r)
            assert abs(k.values[row, col] - ref) <= 1e-12 * max(1.0, abs(ref))


@given(omegas, st.floats(0, math.pi))
def test_opposite_direction_conjugates(w, t):
    a = gabor_kernel(GaborParams(w, t), 5).values
    b = gabor_kernel(GaborParams(w, t + math.pi), 5).values
    np.testing.assert_allclose(a.real, b.real, atol=1e-14)
    np.testing.assert_allclose(a.imag, -b.imag, atol=1e-14)


def test_dc_gain_small_at_four_delta_finest_scale():
    p = GaborParams(math.pi / 2, 0.3)
    k = gabor_kernel(p, math.ceil(4 * p.delta))
    assert abs(k.values.sum()) < 1e-3 * np.abs(k.values).max()


@given(st.floats(math.pi / 8, math.pi / 2), thetas)
def test_dc_gain_small_at_five_delta(w, t):
    p = GaborParams(w, t)
    k = gabor_kernel(p, math.ceil(5 * p.delta))
    assert abs(k.values.sum()) < 1e-3 * np.abs(k.values).max()


def test_three_delta_leaks_at_coarse_scale():
    # why the default radius factor is 5
    p = GaborParams(math.pi / 8, 0.0)
    k = gabor_kernel(p, math.ceil(3 * p.delta))
    assert abs(k.values.sum()) > 0.1 * np.abs(k.values).max()


def test_dc_gain_at_default_radius():
    for k in BANK:
        assert abs(k.values.sum()) < 1e-3 * np.abs(k.values).max()


def test_bank_layout():
    assert len(BANK) == 6
    assert [k.radius for k in BANK] == [10, 10, 20, 20, 40, 40]
    assert [k.radius for k in build_filter_bank(radius_factor=3)] == [6, 6, 12, 12, 24, 24]
    assert BANK[0].params.omega == BANK[1].params.omega
    assert BANK[0].params.theta != BANK[1].params.theta
    assert BANK.omegas == (math.pi / 2, math.pi / 4, math.pi / 8)
    assert BANK.max_radius == 40


@pytest.mark.parametrize("kw", [
    {"omegas": (1.0, 0.5)},
    {"omegas": (0.5, 1.0, 0.25)},
    {"thetas": (0.0,)},
    {"thetas": (0.0, 0.0)},
    {"thetas": (0.0, 4.0)},
    {"radius_factor": 0},
])
def test_bank_rejects(kw):
    with pytest.raises(ValueError):
        build_filter_bank(**kw)


def test_params_validation():
    with pytest.raises(ValueError):
        GaborParams(0.0, 0.0)
    with pytest.raises(ValueError):
        GaborParams(1.0, float("nan"))


@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)),
              elements=st.floats(-4, 4)), st.integers(1, 4), thetas)
def test_apply_matches_loop_oracle(img, r, t):
    # includes pads wider than the image
    k = gabor_kernel(GaborParams(1.1, t), r)
    ref = np.array(convolve_symmetric(img.tolist(), k.values.tolist()))
    for method in ("fft", "direct"):
        np.testing.assert_allclose(apply_gabor(img, k, method), ref, atol=1e-12)


def test_constant_image_response_small():
    img = np.full((40, 50), 3.5)
    for k in BANK:
        assert np.abs(apply_gabor(img, k)).max() <= 1e-3 * 3.5 * np.abs(k.values).max()


def test_zero_image_zero_response():
    for k in BANK:
        assert not apply_gabor(np.zeros((9, 9)), k, "direct").any()


def test_aligned_grating_responds_more():
    w = math.pi / 4
    y, x = np.mgrid[0:64, 0:64].astype(float)
    along = np.cos(w * x)
    across = np.cos(w * y)
    p = GaborParams(w, 0.0)
    k = gabor_kernel(p, math.ceil(3 * p.delta))
    a = np.abs(np.array(convolve_symmetric(along.tolist(), k.values.tolist()))).mean()
    b = np.abs(apply_gabor(across, k, "direct")).mean()
    assert a > b


def test_apply_bank_matches_single_kernels():
    rng = np.random.default_rng(3)
    img = rng.standard_normal((30, 37))
    for k, resp in zip(BANK, apply_bank(img, BANK)):
        np.testing.assert_allclose(resp, apply_gabor(img, k, "direct"), atol=1e-11)


def test_apply_rejects_bad_input():
    with pytest.raises(DimensionError):
        apply_gabor(np.zeros((2, 2, 2)), BANK[0])
    with pytest.raises(ValueError):
        apply_gabor(np.zeros((2, 2)), BANK[0], "spline")


def test_magnitude_examples():
    assert not magnitude(np.zeros((3, 3), complex)).any()
    assert magnitude(np.array([3 + 4j]))[0] == 5


@given(arrays(np.complex128, (4, 5), elements=st.complex_numbers(max_magnitude=1e3)), thetas)
def test_magnitude_phase_invariant(z, phi):
    np.testing.assert_allclose(magnitude(z * np.exp(1j * phi)), magnitude(z), rtol=1e-12, atol=1e-9)


def test_gabor_magnitudes_shapes():
    out = gabor_magnitudes(np.ones((12, 14)), BANK)
    assert len(out) == 6 and all(m.shape == (12, 14) and (m >= 0).all() for m in out)

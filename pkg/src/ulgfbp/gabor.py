"""Complex Gabor filter bank and Gabor magnitude images (GMIs).

Each kernel sample is

    G(x_p, y_p) = 1/(2 pi d^2) * exp(-(x_p^2 + y_p^2) / (2 d^2))
                  * [exp(j w x_p) - exp(-w^2 d^2 / 2)]

with ``x_p = x cos(t) + y sin(t)``, ``y_p = -x sin(t) + y cos(t)`` and the
envelope width tied to the frequency, ``d = pi / w``.  ``x`` runs along
columns and ``y`` along rows.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError

DEFAULT_OMEGAS = (math.pi / 2, math.pi / 4, math.pi / 8)
DEFAULT_THETAS = (0.0, math.pi / 2)
# ceil(3 * delta) leaves up to 0.39 * max|G| of DC leakage at w = pi/8;
# 5 * delta brings every default kernel below 1.1e-4.
DEFAULT_RADIUS_FACTOR = 5.0


@dataclass(frozen=True)
class GaborParams:
    omega: float
    theta: float

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")

    @property
    def delta(self):
        return math.pi / self.omega


@dataclass(frozen=True)
class ComplexKernel:
    params: GaborParams
    radius: int
    values: np.ndarray = field(repr=False)

    @property
    def side(self):
        return 2 * self.radius + 1


@dataclass(frozen=True)
class GaborBank:
    kernels: tuple

    def __len__(self):
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    def __getitem__(self, i):
        return self.kernels[i]

    @property
    def omegas(self):
        return tuple(dict.fromkeys(k.params.omega for k in self.kernels))

    @property
    def thetas(self):
        return tuple(dict.fromkeys(k.params.theta for k in self.kernels))

    @property
    def max_radius(self):
        return max(k.radius for k in self.kernels)


def gabor_kernel(params, radius):
    radius = int(radius)
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    w, t, d = params.omega, params.theta, params.delta
    y, x = np.mgrid[-radius:radius + 1, -radius:radius + 1].astype(np.float64)
    xp = x * math.cos(t) + y * math.sin(t)
    yp = -x * math.sin(t) + y * math.cos(t)
    envelope = np.exp(-(xp ** 2 + yp ** 2) / (2 * d * d)) / (2 * math.pi * d * d)
    carrier = np.exp(1j * w * xp) - math.exp(-(w * w * d * d) / 2)
    return ComplexKernel(params, radius, envelope * carrier)


def build_filter_bank(omegas=DEFAULT_OMEGAS, thetas=DEFAULT_THETAS,
                      radius_factor=DEFAULT_RADIUS_FACTOR):
    """Three scales x two directions, scale-major, radius ``ceil(factor * delta)``."""
    omegas = tuple(float(o) for o in omegas)
    thetas = tuple(float(t) for t in thetas)
    if len(omegas) != 3:
        raise ValueError(f"expected 3 omegas, got {len(omegas)}")
    if len(thetas) != 2:
        raise ValueError(f"expected 2 thetas, got {len(thetas)}")
    if any(a <= b for a, b in zip(omegas, omegas[1:])):
        raise ValueError(f"omegas must be strictly decreasing: {omegas}")
    if thetas[0] == thetas[1]:
        raise ValueError(f"thetas must be distinct: {thetas}")
    if any(not 0 <= t < math.pi for t in thetas):
        raise ValueError(f"thetas must lie in [0, pi): {thetas}")
    if radius_factor <= 0:
        raise ValueError(f"radius_factor must be positive, got {radius_factor}")
    bank = []
    for w in omegas:
        for t in thetas:
            params = GaborParams(w, t)
            bank.append(gabor_kernel(params, math.ceil(radius_factor * params.delta)))
    return GaborBank(tuple(bank))


def _pad(img, r):
    # "symmetric" repeats the edge sample (d c b a | a b c d); it also copes
    # with pads wider than the image
    return np.pad(img, r, mode="symmetric")


def _check_image(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise DimensionError(f"expected a non-empty 2-D image, got shape {img.shape}")
    return img


def _fft_valid(padded, kernel_values):
    kh, kw = kernel_values.shape
    shape = (padded.shape[0] + kh - 1, padded.shape[1] + kw - 1)
    spec = np.fft.fft2(padded, s=shape) * np.fft.fft2(kernel_values, s=shape)
    full = np.fft.ifft2(spec)
    return full[kh - 1:padded.shape[0], kw - 1:padded.shape[1]]


def apply_gabor(img, kernel, method="fft"):
    """Convolve ``img`` with ``kernel`` under reflect padding; same-size output.

    ``method="direct"`` evaluates the convolution sum in the spatial domain
    and is the reference the FFT path is tested against.
    """
    img = _check_image(img)
    padded = _pad(img, kernel.radius)
    if method == "fft":
        return _fft_valid(padded, kernel.values)
    if method == "direct":
        return kernels.convolve_valid(padded, kernel.values)
    raise ValueError(f"unknown method {method!r}")


def apply_bank(img, bank):
    """Complex responses for every kernel of ``bank``, sharing one image FFT."""
    img = _check_image(img)
    R = bank.max_radius
    padded = _pad(img, R)
    side = 2 * R + 1
    shape = (padded.shape[0] + side - 1, padded.shape[1] + side - 1)
    img_f = np.fft.fft2(padded, s=shape)
    out = []
    for k in bank:
        # centre the smaller kernel inside a (2R+1)^2 support
        embedded = np.zeros((side, side), dtype=np.complex128)
        o = R - k.radius
        embedded[o:o + k.side, o:o + k.side] = k.values
        full = np.fft.ifft2(img_f * np.fft.fft2(embedded, s=shape))
        out.append(full[side - 1:padded.shape[0], side - 1:padded.shape[1]])
    return out


def magnitude(response):
    response = np.asarray(response)
    return np.sqrt(response.real ** 2 + response.imag ** 2)


def gabor_magnitudes(img, bank):
    """One GMI per bank kernel, in bank order."""
    return [magnitude(r) for r in apply_bank(img, bank)]

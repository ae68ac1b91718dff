"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``lbp_codes``, ``convolve_valid``, ``chi2_distances``)
point at the numba versions unless ``ULGFBP_DISABLE_NUMBA`` is set to a
truthy value or numba cannot be imported.  Both flavours are always
importable as ``*_numba`` / ``*_numpy`` so they can be cross-checked and
benchmarked against each other.
"""

import os

import numpy as np

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None

_FLAG = os.environ.get("ULGFBP_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = nb is not None and _FLAG not in ("1", "true", "yes", "on")

CHI2_EPS = 1e-12


def _njit(fn):
    if nb is None:
        return fn
    return nb.njit(cache=False, nogil=True)(fn)


def ring_offsets(radius):
    """(dy, dx) of the square pixel ring at Chebyshev distance ``radius``.

    Clockwise from the top neighbour, so index 0 is straight up.  The ring
    has ``8 * radius`` pixels, which is exactly ``SP = 4 * (2R)``.
    """
    r = int(radius)
    if r < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    offs = []
    # top edge, from centre column rightwards
    for dx in range(0, r + 1):
        offs.append((-r, dx))
    for dy in range(-r + 1, r + 1):
        offs.append((dy, r))
    for dx in range(r - 1, -r - 1, -1):
        offs.append((r, dx))
    for dy in range(r - 1, -r - 1, -1):
        offs.append((dy, -r))
    for dx in range(-r + 1, 0):
        offs.append((-r, dx))
    return np.array(offs, dtype=np.int64)


# --------------------------------------------------------------------------
# LBP codes


@_njit
def _lbp_codes_loop(img, offsets, radius):
    h, w = img.shape
    n = offsets.shape[0]
    out = np.empty((h - 2 * radius, w - 2 * radius), dtype=np.int64)
    for y in range(radius, h - radius):
        for x in range(radius, w - radius):
            c = img[y, x]
            code = 0
            for ep in range(n):
                code <<= 1
                if img[y + offsets[ep, 0], x + offsets[ep, 1]] - c >= 0:
                    code |= 1
            out[y - radius, x - radius] = code
    return out


def lbp_codes_numba(img, radius=1):
    img = np.ascontiguousarray(img, dtype=np.float64)
    return _lbp_codes_loop(img, ring_offsets(radius), int(radius))


def lbp_codes_numpy(img, radius=1):
    img = np.asarray(img, dtype=np.float64)
    r = int(radius)
    h, w = img.shape
    centre = img[r:h - r, r:w - r]
    code = np.zeros(centre.shape, dtype=np.int64)
    for dy, dx in ring_offsets(r):
        nb_vals = img[r + dy:h - r + dy, r + dx:w - r + dx]
        code = (code << 1) | (nb_vals - centre >= 0)
    return code


# --------------------------------------------------------------------------
# direct 2-D convolution, "valid" support


@_njit
def _convolve_valid_loop(padded, kernel):
    ph, pw = padded.shape
    kh, kw = kernel.shape
    oh = ph - kh + 1
    ow = pw - kw + 1
    out = np.zeros((oh, ow), dtype=np.complex128)
    for i in range(oh):
        for j in range(ow):
            acc = 0j
            for a in range(kh):
                row = i + kh - 1 - a
                for b in range(kw):
                    acc += kernel[a, b] * padded[row, j + kw - 1 - b]
            out[i, j] = acc
    return out


def convolve_valid_numba(padded, kernel):
    padded = np.ascontiguousarray(padded, dtype=np.complex128)
    kernel = np.ascontiguousarray(kernel, dtype=np.complex128)
    return _convolve_valid_loop(padded, kernel)


def convolve_valid_numpy(padded, kernel):
    padded = np.asarray(padded, dtype=np.complex128)
    kernel = np.asarray(kernel, dtype=np.complex128)
    kh, kw = kernel.shape
    oh = padded.shape[0] - kh + 1
    ow = padded.shape[1] - kw + 1
    out = np.zeros((oh, ow), dtype=np.complex128)
    for a in range(kh):
        r0 = kh - 1 - a
        for b in range(kw):
            c0 = kw - 1 - b
            out += kernel[a, b] * padded[r0:r0 + oh, c0:c0 + ow]
    return out


# --------------------------------------------------------------------------
# chi-square distance matrix


@_njit
def _chi2_loop(queries, train, eps):
    nq, d = queries.shape
    nt = train.shape[0]
    out = np.empty((nq, nt), dtype=np.float64)
    for i in range(nq):
        for j in range(nt):
            s = 0.0
            for f in range(d):
                a = queries[i, f]
                b = train[j, f]
                diff = a - b
                s += diff * diff / (a + b + eps)
            out[i, j] = s
    return out


def chi2_distances_numba(queries, train):
    q = np.ascontiguousarray(np.atleast_2d(queries), dtype=np.float64)
    t = np.ascontiguousarray(np.atleast_2d(train), dtype=np.float64)
    return _chi2_loop(q, t, CHI2_EPS)


def chi2_distances_numpy(queries, train, block=64):
    q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    t = np.atleast_2d(np.asarray(train, dtype=np.float64))
    out = np.empty((q.shape[0], t.shape[0]), dtype=np.float64)
    # row blocks keep the (block, nt, d) temporary bounded
    for s in range(0, q.shape[0], block):
        qb = q[s:s + block, None, :]
        diff = qb - t[None, :, :]
        out[s:s + block] = np.sum(diff * diff / (qb + t[None, :, :] + CHI2_EPS), axis=2)
    return out


if USE_NUMBA:
    lbp_codes = lbp_codes_numba
    convolve_valid = convolve_valid_numba
    chi2_distances = chi2_distances_numba
else:
    lbp_codes = lbp_codes_numpy
    convolve_valid = convolve_valid_numpy
    chi2_distances = chi2_distances_numpy


def backend():
    return "numba" if USE_NUMBA else "numpy"

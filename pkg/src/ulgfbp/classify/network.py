"""Small residual CNN with hand-written forward and backward passes.

Layout is channels-last, ``(N, H, W, C)``, matching the ``(h, w, 3)`` maps.

    input -> conv3x3/2 (8) -> ReLU -> residual(8)
          -> conv3x3/2 (16) -> ReLU -> residual(16)
          -> global average pool -> head -> softmax

A residual block is ``x + conv_b(relu(conv_a(x)))`` with 3x3, stride-1
convolutions, so all-zero block weights give the identity.  The head is one
fully connected layer, or two with a ReLU in between when ``head_depth=2``.
"""

import numpy as np

from ..errors import DimensionError

HEAD_INIT_SCALE = 0.05


def _conv_out(n, stride):
    return (n + 2 - 3) // stride + 1


def conv_forward(x, w, b, stride):
    """3x3 convolution, zero padding 1.  ``w`` is ``(3, 3, C, O)``."""
    n, h, wd, c = x.shape
    ho, wo = _conv_out(h, stride), _conv_out(wd, stride)
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    cols = np.empty((n, ho, wo, 9, c), dtype=x.dtype)
    for a in range(3):
        for bb in range(3):
            cols[:, :, :, 3 * a + bb, :] = xp[:, a:a + stride * (ho - 1) + 1:stride,
                                              bb:bb + stride * (wo - 1) + 1:stride, :]
    cols = cols.reshape(n * ho * wo, 9 * c)
    out = cols @ w.reshape(9 * c, -1) + b
    return out.reshape(n, ho, wo, -1), (cols, x.shape, stride)


def conv_backward(dout, w, cache):
    cols, xshape, stride = cache
    n, h, wd, c = xshape
    _, ho, wo, o = dout.shape
    d2 = dout.reshape(-1, o)
    dw = (cols.T @ d2).reshape(w.shape)
    db = d2.sum(axis=0)
    dcols = (d2 @ w.reshape(9 * c, o).T).reshape(n, ho, wo, 9, c)
    dxp = np.zeros((n, h + 2, wd + 2, c), dtype=dout.dtype)
    for a in range(3):
        for bb in range(3):
            dxp[:, a:a + stride * (ho - 1) + 1:stride,
                bb:bb + stride * (wo - 1) + 1:stride, :] += dcols[:, :, :, 3 * a + bb, :]
    return dxp[:, 1:-1, 1:-1, :], dw, db


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class ResidualNet:
    """Parameters live in ``self.params`` in a fixed, documented order."""

    CONV_LAYERS = ("conv1", "res1.a", "res1.b", "conv2", "res2.a", "res2.b")

    def __init__(self, n_classes=3, input_shape=(224, 224, 3), head_depth=1,
                 head_hidden=32, seed=0, widths=(8, 16), dtype=np.float64):
        if head_depth not in (1, 2):
            raise ValueError(f"head_depth must be 1 or 2, got {head_depth}")
        self.input_shape = tuple(int(v) for v in input_shape)
        self.head_depth = int(head_depth)
        self.head_hidden = int(head_hidden)
        self.widths = tuple(widths)
        self.dtype = np.dtype(dtype)
        self.seed = int(seed)
        rng = np.random.default_rng([self.seed, 0])
        c_in = self.input_shape[2]
        w1, w2 = self.widths
        shapes = {
            "conv1": (c_in, w1), "res1.a": (w1, w1), "res1.b": (w1, w1),
            "conv2": (w1, w2), "res2.a": (w2, w2), "res2.b": (w2, w2),
        }
        self.params = {}
        for name in self.CONV_LAYERS:
            ci, co = shapes[name]
            std = np.sqrt(2.0 / (9 * ci))
            self.params[f"{name}.w"] = (rng.standard_normal((3, 3, ci, co)) * std).astype(self.dtype)
            self.params[f"{name}.b"] = np.zeros(co, dtype=self.dtype)
        self.n_classes = 0
        replace_head(self, n_classes, seed=self.seed)

    # -- structure ---------------------------------------------------------

    def head_names(self):
        names = ["fc.w", "fc.b"]
        if self.head_depth == 2:
            names = ["fc1.w", "fc1.b"] + names
        return names

    def param_names(self):
        return [n for n in self.params]

    def copy(self):
        other = object.__new__(ResidualNet)
        other.__dict__.update(self.__dict__)
        other.params = {k: v.copy() for k, v in self.params.items()}
        return other

    # -- passes ------------------------------------------------------------

    def _check_input(self, x):
        x = np.asarray(x)
        if x.ndim == 3:
            x = x[None]
        if x.ndim != 4 or tuple(x.shape[1:]) != self.input_shape:
            raise DimensionError(f"expected batch of {self.input_shape} maps, got {x.shape}")
        return x.astype(self.dtype, copy=False)

    def _res_forward(self, x, name, cache):
        p = self.params
        za, ca = conv_forward(x, p[f"{name}.a.w"], p[f"{name}.a.b"], 1)
        ha = np.maximum(za, 0)
        zb, cb = conv_forward(ha, p[f"{name}.b.w"], p[f"{name}.b.b"], 1)
        cache[name] = (ca, za, cb)
        return x + zb

    def _res_backward(self, dout, name, cache, grads):
        p = self.params
        ca, za, cb = cache[name]
        dha, grads[f"{name}.b.w"], grads[f"{name}.b.b"] = conv_backward(dout, p[f"{name}.b.w"], cb)
        dza = dha * (za > 0)
        dx, grads[f"{name}.a.w"], grads[f"{name}.a.b"] = conv_backward(dza, p[f"{name}.a.w"], ca)
        return dx + dout

    def logits(self, x, cache=None):
        cache = {} if cache is None else cache
        p = self.params
        x = self._check_input(x)
        z1, cache["conv1"] = conv_forward(x, p["conv1.w"], p["conv1.b"], 2)
        a1 = np.maximum(z1, 0)
        cache["z1"] = z1
        o1 = self._res_forward(a1, "res1", cache)
        z2, cache["conv2"] = conv_forward(o1, p["conv2.w"], p["conv2.b"], 2)
        cache["z2"] = z2
        a2 = np.maximum(z2, 0)
        o2 = self._res_forward(a2, "res2", cache)
        cache["pool_shape"] = o2.shape
        g = o2.mean(axis=(1, 2))
        cache["g"] = g
        if self.head_depth == 2:
            zh = g @ p["fc1.w"] + p["fc1.b"]
            cache["zh"] = zh
            g = np.maximum(zh, 0)
            cache["h"] = g
        return g @ p["fc.w"] + p["fc.b"], cache

    def forward(self, x):
        """Class probabilities ``(N, n_classes)`` and the activation cache."""
        z, cache = self.logits(x)
        probs = softmax(z)
        cache["probs"] = probs
        return probs, cache

    def backward(self, cache, targets):
        """Gradients of the batch-mean cross-entropy for every parameter."""
        p = self.params
        probs = cache["probs"]
        targets = np.asarray(targets, dtype=np.int64)
        n = probs.shape[0]
        if targets.shape != (n,):
            raise DimensionError(f"expected {n} targets, got shape {targets.shape}")
        grads = {}
        dz = probs.copy()
        dz[np.arange(n), targets] -= 1.0
        dz /= n
        feat = cache["h"] if self.head_depth == 2 else cache["g"]
        grads["fc.w"] = feat.T @ dz
        grads["fc.b"] = dz.sum(axis=0)
        dfeat = dz @ p["fc.w"].T
        if self.head_depth == 2:
            dzh = dfeat * (cache["zh"] > 0)
            grads["fc1.w"] = cache["g"].T @ dzh
            grads["fc1.b"] = dzh.sum(axis=0)
            dfeat = dzh @ p["fc1.w"].T
        _, ph, pw, _ = cache["pool_shape"]
        do2 = np.broadcast_to(dfeat[:, None, None, :] / (ph * pw), cache["pool_shape"])
        do2 = np.ascontiguousarray(do2)
        da2 = self._res_backward(do2, "res2", cache, grads)
        dz2 = da2 * (cache["z2"] > 0)
        do1, grads["conv2.w"], grads["conv2.b"] = conv_backward(dz2, p["conv2.w"], cache["conv2"])
        da1 = self._res_backward(do1, "res1", cache, grads)
        dz1 = da1 * (cache["z1"] > 0)
        _, grads["conv1.w"], grads["conv1.b"] = conv_backward(dz1, p["conv1.w"], cache["conv1"])
        return {k: grads[k] for k in self.params}

    def loss(self, x, targets):
        probs, _ = self.forward(x)
        return cross_entropy(probs, targets)

    def predict_proba(self, x, batch_size=20):
        x = np.asarray(x)
        out = [self.forward(x[i:i + batch_size])[0] for i in range(0, len(x), batch_size)]
        return np.concatenate(out) if out else np.zeros((0, self.n_classes))

    def predict(self, x, batch_size=20):
        return np.argmax(self.predict_proba(x, batch_size), axis=1)


def cross_entropy(probs, targets):
    targets = np.asarray(targets, dtype=np.int64)
    picked = probs[np.arange(len(targets)), targets]
    return float(-np.mean(np.log(np.maximum(picked, np.finfo(np.float64).tiny))))


def replace_head(net, n_classes, seed=None):
    """Swap in a fresh head for ``n_classes``; other weights are untouched."""
    n_classes = int(n_classes)
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    rng = np.random.default_rng([net.seed if seed is None else int(seed), 1])
    for name in ("fc1.w", "fc1.b", "fc.w", "fc.b"):
        net.params.pop(name, None)
    width = net.widths[1]
    if net.head_depth == 2:
        net.params["fc1.w"] = rng.uniform(-HEAD_INIT_SCALE, HEAD_INIT_SCALE,
                                          (width, net.head_hidden)).astype(net.dtype)
        net.params["fc1.b"] = np.zeros(net.head_hidden, dtype=net.dtype)
        width = net.head_hidden
    net.params["fc.w"] = rng.uniform(-HEAD_INIT_SCALE, HEAD_INIT_SCALE,
                                     (width, n_classes)).astype(net.dtype)
    net.params["fc.b"] = np.zeros(n_classes, dtype=net.dtype)
    net.n_classes = n_classes
    return net

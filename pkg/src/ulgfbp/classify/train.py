"""Adam and the mini-batch training loop."""

import math
from dataclasses import dataclass, field

import numpy as np

from .network import cross_entropy


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 20
    learning_rate: float = 1e-4
    epochs: int = 5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def adam_step(params, grads, state, cfg, t):
    """One bias-corrected Adam update, in place.  ``t`` counts from 1."""
    if t < 1:
        raise ValueError(f"Adam step index starts at 1, got {t}")
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for name, g in grads.items():
        p = params[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} does not match {name} {p.shape}")
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        v = state.v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * (g * g)
        p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
    state.t = t
    return params, state


@dataclass
class TrainTrace:
    iteration: list = field(default_factory=list)
    loss: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)
    epoch: list = field(default_factory=list)

    def __len__(self):
        return len(self.iteration)

    def epoch_mean(self, which, epoch):
        vals = [v for v, e in zip(getattr(self, which), self.epoch) if e == epoch]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def n_epochs(self):
        return (max(self.epoch) + 1) if self.epoch else 0


def iterations_per_epoch(n_samples, batch_size):
    return math.ceil(n_samples / batch_size)


def train(net, maps, labels, cfg=TrainConfig(), progress=None):
    """Train ``net`` in place; returns ``(net, trace)``.

    Samples are reshuffled each epoch by a generator seeded from
    ``cfg.seed``; the last partial batch is kept.  Loss and accuracy in the
    trace are those of each mini-batch before its update.
    """
    maps = np.asarray(maps)
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if len(maps) != n:
        raise ValueError(f"{len(maps)} maps but {n} labels")
    rng = np.random.default_rng(cfg.seed)
    state = AdamState()
    trace = TrainTrace()
    t = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            probs, cache = net.forward(maps[idx])
            grads = net.backward(cache, labels[idx])
            t += 1
            trace.iteration.append(t)
            trace.loss.append(cross_entropy(probs, labels[idx]))
            trace.accuracy.append(float(np.mean(np.argmax(probs, axis=1) == labels[idx])))
            trace.epoch.append(epoch)
            adam_step(net.params, grads, state, cfg, t)
            if progress:
                progress(epoch, t, trace.loss[-1], trace.accuracy[-1])
    return net, trace

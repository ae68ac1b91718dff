"""Plain-text ``key = value`` run configuration.

Lines starting with ``#`` are comments.  Angle lists accept ``pi``
expressions such as ``pi/2``, ``3*pi/4`` or ``0.5``.  Unknown keys are
rejected and every value is validated when the file is loaded.
"""

import math
import os
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .classify import TrainConfig
from .errors import ConfigError
from .pipeline import PipelineConfig
from .ulbp import MODES, LbpConfig

_PI_EXPR = re.compile(r"^\s*(?:([0-9.]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.]+))?\s*$")


def parse_angle(text):
    text = text.strip().lower()
    m = _PI_EXPR.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(text)


def _angle_list(text):
    return tuple(parse_angle(t) for t in text.split(",") if t.strip())


@dataclass(frozen=True)
class RunConfig:
    resize_width: int = 256
    resize_height: int = 256
    omegas: tuple = (math.pi / 2, math.pi / 4, math.pi / 8)
    thetas: tuple = (0.0, math.pi / 2)
    gabor_radius_factor: float = 5.0
    lbp_radius: int = 1
    lbp_mode: str = "u2"
    grid: int = 3
    map_width: int = 224
    map_height: int = 224
    knn_k: int = 1
    batch_size: int = 20
    learning_rate: float = 1e-4
    epochs: int = 5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    head_depth: int = 1
    head_hidden: int = 32
    folds: int = 10
    seed: int = 0
    jobs: int = 0  # 0 = one worker per logical core

    def pipeline(self):
        return PipelineConfig(
            resize=(self.resize_width, self.resize_height), omegas=self.omegas,
            thetas=self.thetas, radius_factor=self.gabor_radius_factor,
            lbp=LbpConfig(self.lbp_radius), map_size=(self.map_width, self.map_height),
            grid=self.grid, mode=self.lbp_mode)

    def train(self):
        return TrainConfig(batch_size=self.batch_size, learning_rate=self.learning_rate,
                           epochs=self.epochs, beta1=self.adam_beta1, beta2=self.adam_beta2,
                           eps=self.adam_eps, seed=self.seed)

    def validate(self):
        try:
            self.pipeline().bank()
            self.train()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.lbp_mode not in MODES:
            raise ConfigError(f"lbp_mode must be one of {MODES}")
        if self.knn_k < 1:
            raise ConfigError(f"knn_k must be >= 1, got {self.knn_k}")
        if self.head_depth not in (1, 2):
            raise ConfigError(f"head_depth must be 1 or 2, got {self.head_depth}")
        if self.head_hidden < 1:
            raise ConfigError(f"head_hidden must be >= 1, got {self.head_hidden}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.jobs < 0:
            raise ConfigError(f"jobs must be >= 0, got {self.jobs}")
        return self

    def worker_count(self):
        return self.jobs or (os.cpu_count() or 1)


_PARSERS = {}
for _f in fields(RunConfig):
    if _f.name in ("omegas", "thetas"):
        _PARSERS[_f.name] = _angle_list
    elif _f.type in ("int", int):
        _PARSERS[_f.name] = int
    elif _f.type in ("float", float):
        _PARSERS[_f.name] = float
    else:
        _PARSERS[_f.name] = str.strip


def parse_config_text(text, source="<config>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def load_config(path=None, overrides=None):
    """Defaults <- ``ULGFBP_SEED`` <- config file <- ``overrides`` (CLI flags)."""
    values = {}
    env_seed = os.environ.get("ULGFBP_SEED")
    if env_seed:
        try:
            values["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"ULGFBP_SEED is not an integer: {env_seed!r}") from exc
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text, str(path)))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(values) - set(_PARSERS)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    return replace(RunConfig(), **values).validate()

"""Experiment configuration: a flat TOML table of scalar keys."""

import dataclasses
import sys
from dataclasses import dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cs_codec import CodecConfig
from .errors import ConfigurationError, PolarAirError
from .toy_model import MlpShape

MODES = ("polarair", "dense")
OPTIMIZERS = ("adam", "sgd")
GRADIENT_SOURCES = ("mlp", "synthetic")


class ConfigNotFoundError(PolarAirError, FileNotFoundError):
    pass


class ConfigParseError(PolarAirError, ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    mode: str = "polarair"
    epochs: int = 6
    workers: int = 4
    # codec
    N: int = 8192
    K: int = 64
    B_f: int = 4
    B_s: int = 9
    r: int = 8
    n_c: int = 32
    L: int = 64
    n_L: int = 2
    P: float = 1000.0
    max_sic_iters: int = 10
    min_fit: float = 0.3  # aggregates of W>1 workers are not K-sparse; see README
    crc_poly: int = 0x07
    crc_init: int = 0
    adaptive: bool = True
    # channel
    noise_std: float = 1.0
    # training
    optimizer: str = "adam"
    lr: float = 0.01
    batch_size: int = 64
    gradient_source: str = "mlp"
    rescale_by_workers: bool = False
    target_accuracy: float = 0.9
    # model and data
    d_in: int = 32
    d_h: int = 128
    d_out: int = 4
    n_train: int = 2048
    n_test: int = 1024
    class_sep: float = 3.0
    cluster_std: float = 1.0

    def __post_init__(self):
        validate(self)

    @property
    def model_shape(self):
        return MlpShape(self.d_in, self.d_h, self.d_out)

    def codec_config(self, L=None, n_c=None, seed=None):
        return CodecConfig(N=self.N, K=self.K, B_f=self.B_f, B_s=self.B_s,
                           L=self.L if L is None else L, n_c=self.n_c if n_c is None else n_c,
                           r=self.r, n_L=self.n_L, P=self.P,
                           seed=self.seed if seed is None else seed,
                           max_sic_iters=self.max_sic_iters, min_fit=self.min_fit,
                           crc_poly=self.crc_poly, crc_init=self.crc_init)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def validate(cfg):
    if cfg.mode not in MODES:
        raise ConfigurationError(f"mode must be one of {MODES}, got {cfg.mode!r}", ("mode",))
    if cfg.optimizer not in OPTIMIZERS:
        raise ConfigurationError(f"optimizer must be one of {OPTIMIZERS}", ("optimizer",))
    if cfg.gradient_source not in GRADIENT_SOURCES:
        raise ConfigurationError(f"gradient_source must be one of {GRADIENT_SOURCES}",
                                 ("gradient_source",))
    for key in ("epochs", "workers", "batch_size"):
        if getattr(cfg, key) < 1:
            raise ConfigurationError(f"{key} must be >= 1", (key,))
    if cfg.noise_std < 0:
        raise ConfigurationError("noise_std must be >= 0", ("noise_std",))
    if not cfg.lr > 0:
        raise ConfigurationError("lr must be positive", ("lr",))
    if cfg.K > cfg.N:
        raise ConfigurationError(f"K={cfg.K} exceeds N={cfg.N}", ("K", "N"))
    cfg.codec_config()  # raises on any codec invariant violation
    if cfg.gradient_source == "mlp":
        n_params = cfg.model_shape.n_params
        if n_params > cfg.N:
            raise ConfigurationError(f"model has {n_params} parameters but N={cfg.N}",
                                     ("N", "d_in", "d_h", "d_out"))
        if cfg.n_train // cfg.workers < cfg.batch_size:
            raise ConfigurationError("each worker shard must hold at least one batch",
                                     ("n_train", "workers", "batch_size"))


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key, value):
    kind = _FIELD_TYPES[key]
    kind = {"int": int, "float": float, "str": str, "bool": bool}.get(kind, kind)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{key} must be a boolean", (key,))
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{key} must be an integer", (key,))
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{key} must be a number", (key,))
        return float(value)
    if not isinstance(value, str):
        raise ConfigurationError(f"{key} must be a string", (key,))
    return value


def config_from_mapping(data):
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}", unknown)
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in data.items()})


def load_config(path, **overrides):
    """Parse and validate a TOML config; ``None`` overrides are ignored."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise ConfigNotFoundError(f"config file not found: {path}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigurationError(f"config must be flat; found tables {nested}", nested)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(data)

"""Experiment configuration and its flat ``key = value`` file format."""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from ..bpsk import Scheme
from ..fnn import FnnArchitecture, Head
from ..init import InitKind
from ..optim import Variant


@dataclass(frozen=True)
class ExperimentConfig:
    depth: int = 3
    half_width: int = 3
    head: Head = Head.LINEAR
    scheme: Scheme = Scheme.ALL_SNR
    per_snr_train_n: int = 20_000
    per_snr_test_n: int = 50_000
    batch_size: Optional[int] = None  # 80 for a linear head, 40 for tanh
    max_epochs: int = 200
    learning_rate: float = 0.01
    optimizer: Variant = Variant.ADAM
    momentum: Optional[float] = None
    rho: Optional[float] = None
    rho1: Optional[float] = None
    rho2: Optional[float] = None
    delta: Optional[float] = None
    init: InitKind = InitKind.HE_NORMAL
    constraint_min: Optional[float] = 1.0
    constraint_max: Optional[float] = 5.0
    early_stop_patience: int = 20
    lr_reduce_patience: int = 40
    lr_reduce_factor: float = 0.5
    min_delta: float = 1e-6
    val_fraction: float = 0.2
    keep_best: bool = False
    seed: int = 0
    out_dir: Optional[str] = None

    def __post_init__(self):
        for name, enum_type in (("head", Head), ("scheme", Scheme), ("optimizer", Variant), ("init", InitKind)):
            object.__setattr__(self, name, enum_type(getattr(self, name)))
        if self.batch_size is None:
            object.__setattr__(self, "batch_size", 80 if self.head is Head.LINEAR else 40)
        self.arch  # validates K, H
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.early_stop_patience < 1 or self.lr_reduce_patience < 1:
            raise ValueError("patience values must be >= 1")
        if not 0.0 < self.lr_reduce_factor < 1.0:
            raise ValueError("lr_reduce_factor must lie in (0, 1)")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if (self.constraint_min is None) != (self.constraint_max is None):
            raise ValueError("set both constraint bounds or neither")
        if self.constraint and not 0 < self.constraint_min <= self.constraint_max:
            raise ValueError("need 0 < constraint_min <= constraint_max")
        if self.per_snr_train_n % 2 or self.per_snr_test_n % 2:
            raise ValueError("per-SNR sample counts must be even")

    @property
    def arch(self) -> FnnArchitecture:
        return FnnArchitecture(self.depth, self.half_width, 1, self.head)

    @property
    def constraint(self) -> Optional[tuple[float, float]]:
        if self.constraint_min is None:
            return None
        return (self.constraint_min, self.constraint_max)

    def optimizer_settings(self) -> dict:
        return dict(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            rho=self.rho,
            rho1=self.rho1,
            rho2=self.rho2,
            delta=self.delta,
        )

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_ALIASES = {"K": "depth", "H": "half_width"}
_NONE = {"", "none", "null"}


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    default = ExperimentConfig.__dataclass_fields__[name].default
    ftype = ExperimentConfig.__dataclass_fields__[name].type
    if raw.lower() in _NONE and "Optional" in str(ftype):
        return None
    if isinstance(default, bool) or ftype == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if "int" in str(ftype):
        return int(raw)
    if "float" in str(ftype):
        return float(raw)
    return raw


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse flat ``key = value`` lines (``#`` comments allowed).

    ``constraint = none`` disables the norm constraint; ``constraint = 1,5``
    sets both bounds.  Unknown keys are rejected.
    """
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[config]\n" + text, source=source)
    except configparser.Error as exc:
        raise ValueError(f"{source}: {exc}") from exc
    known = {f.name for f in fields(ExperimentConfig)}
    values: dict = {}
    for key, raw in cp["config"].items():
        name = _ALIASES.get(key, key)
        try:
            if name == "constraint":
                if raw.strip().lower() in _NONE:
                    values["constraint_min"] = values["constraint_max"] = None
                else:
                    lo, hi = (float(v) for v in raw.split(","))
                    values["constraint_min"], values["constraint_max"] = lo, hi
                continue
            if name not in known:
                raise ValueError(f"unknown key {key!r}")
            values[name] = _parse_value(name, raw)
        except ValueError as exc:
            raise ValueError(f"{source}: {key}: {exc}") from exc
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def format_config(config: ExperimentConfig) -> str:
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        if v is None:
            text = "none"
        elif hasattr(v, "value"):
            text = v.value
        else:
            text = repr(v) if isinstance(v, float) else str(v)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"

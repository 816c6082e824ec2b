"""Gaussian weight initialisers (He normal and LeCun normal)."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .fnn import FnnArchitecture, FnnModel
from .rng import derive_rng


class InitKind(str, enum.Enum):
    HE_NORMAL = "he_normal"
    LECUN_NORMAL = "lecun_normal"

    @property
    def variance_scale(self) -> float:
        """Numerator of the per-entry variance ``scale / fan_in``."""
        return 2.0 if self is InitKind.HE_NORMAL else 1.0


@dataclass(frozen=True)
class InitSpec:
    kind: InitKind = InitKind.HE_NORMAL
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", InitKind(self.kind))
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def alpha_init(self) -> float:
        return self.kind.variance_scale


def gaussian_matrix(shape: tuple[int, int], kind: InitKind, rng: np.random.Generator) -> np.ndarray:
    fan_in = shape[1]
    return rng.standard_normal(shape) * np.sqrt(InitKind(kind).variance_scale / fan_in)


def init_model(arch: FnnArchitecture, spec: InitSpec) -> FnnModel:
    """Draw every ``W_k`` entry i.i.d. from ``N(0, scale / N_{k-1})``.

    Each layer has its own stream, so adding layers leaves the earlier ones
    unchanged for a fixed seed.
    """
    weights = [
        gaussian_matrix(shape, spec.kind, derive_rng(int(spec.seed), "init", k))
        for k, shape in enumerate(arch.shapes, start=1)
    ]
    return FnnModel(arch, weights, init=spec)

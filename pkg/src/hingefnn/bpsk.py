"""BPSK over AWGN: sample generation, training schemes and the optimal detector.

With unit noise spectral density the received sample is ``x = +-sqrt(Eb) + z``
with ``z ~ N(0, 1/2)``, so the SNR per bit equals ``Eb``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .rng import derive_rng
from .theory import q_function

SNR_GRID_DB = (0, 5, 10, 15, 20, 25, 30, 35)
NOISE_VAR = 0.5


class Scheme(str, enum.Enum):
    ALL_SNR = "all_snr"
    LOW_SNR = "low_snr"
    HIGH_SNR = "high_snr"

    @property
    def blocks(self) -> list[tuple[int, float, int]]:
        """``(snr index, snr_db, replica)`` for each block, in assembly order."""
        if self is Scheme.ALL_SNR:
            return [(i, float(s), 0) for i, s in enumerate(SNR_GRID_DB)]
        idx = range(4) if self is Scheme.LOW_SNR else range(4, 8)
        return [(i, float(SNR_GRID_DB[i]), r) for r in (0, 1) for i in idx]


class LabeledSample(NamedTuple):
    x: float
    label: int
    snr_db: float


@dataclass(frozen=True)
class LabeledDataset:
    """Column-stored samples; ``provenance`` records how they were made."""

    x: np.ndarray
    labels: np.ndarray
    snr_db: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        labels = np.array(self.labels, dtype=np.int64)
        snr = np.array(self.snr_db, dtype=float)
        if not (x.ndim == labels.ndim == snr.ndim == 1) or not (len(x) == len(labels) == len(snr)):
            raise ValueError("x, labels and snr_db must be 1-d and equally long")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        if not np.all((labels == 1) | (labels == -1)):
            raise ValueError("labels must be -1 or +1")
        for a in (x, labels, snr):
            a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "snr_db", snr)

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i) -> LabeledSample:
        return LabeledSample(float(self.x[i]), int(self.labels[i]), float(self.snr_db[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def samples(self) -> list[LabeledSample]:
        return list(self)

    def snr_points(self) -> np.ndarray:
        return np.unique(self.snr_db)

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.x[idx], self.labels[idx], self.snr_db[idx], self.provenance)

    @classmethod
    def concat(cls, parts, provenance: str = "") -> "LabeledDataset":
        parts = list(parts)
        return cls(
            np.concatenate([p.x for p in parts]),
            np.concatenate([p.labels for p in parts]),
            np.concatenate([p.snr_db for p in parts]),
            provenance,
        )


def _check_n(n) -> int:
    if int(n) != n or n <= 0 or n % 2:
        raise ValueError(f"sample count must be a positive even integer, got {n}")
    return int(n)


def _block(snr_db: float, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    labels = np.repeat(np.array([1, -1], dtype=np.int64), n // 2)
    rng.shuffle(labels)
    amp = np.sqrt(10.0 ** (snr_db / 10.0))
    x = labels * amp + rng.normal(0.0, np.sqrt(NOISE_VAR), size=n)
    return x, labels


def generate_samples(snr_db: float, n: int, seed: int) -> LabeledDataset:
    """``n`` balanced samples at one SNR, labels in seeded random order."""
    n = _check_n(n)
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    x, labels = _block(float(snr_db), n, derive_rng(seed, "samples", repr(float(snr_db))))
    return LabeledDataset(x, labels, np.full(n, float(snr_db)), f"single:{snr_db}:{seed}")


def assemble_scheme(scheme: Scheme | str, per_snr_n: int, seed: int) -> LabeledDataset:
    """Concatenate the blocks of a training scheme.

    Low and high schemes draw two independent blocks per SNR so their total
    size matches the all-SNR scheme.
    """
    scheme = Scheme(scheme)
    n = _check_n(per_snr_n)
    parts = []
    for i, snr, rep in scheme.blocks:
        x, labels = _block(snr, n, derive_rng(seed, "scheme", scheme.value, i, rep))
        parts.append(LabeledDataset(x, labels, np.full(n, snr)))
    return LabeledDataset.concat(parts, f"{scheme.value}:{seed}")


def test_set(per_snr_n: int, seed: int) -> LabeledDataset:
    """Evaluation set over the full SNR grid on its own seed stream."""
    n = _check_n(per_snr_n)
    parts = []
    for i, snr in enumerate(SNR_GRID_DB):
        x, labels = _block(float(snr), n, derive_rng(seed, "test", i))
        parts.append(LabeledDataset(x, labels, np.full(n, float(snr))))
    return LabeledDataset.concat(parts, f"test:{seed}")


test_set.__test__ = False  # keep pytest from collecting it


def optimal_detect(x):
    """Zero-threshold ML decision; ``x == 0`` maps to -1."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    out = np.where(arr > 0.0, 1, -1)
    return int(out) if out.ndim == 0 else out


def optimal_pe(gamma_b):
    """Bit-error probability ``Q(sqrt(2 gamma_b))`` of the optimal detector (linear SNR)."""
    g = np.asarray(gamma_b, dtype=float)
    if not np.all(g > 0):
        raise ValueError("gamma_b must be positive")
    return q_function(np.sqrt(2.0 * g))


def db_to_linear(snr_db):
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)

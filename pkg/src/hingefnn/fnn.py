"""Biasless feedforward networks with ReLU hidden layers and a linear or tanh head.

Weights follow the ``(W_k)[p, q]`` convention: row ``p`` of ``W_k`` holds the
incoming weights of neuron ``p`` in layer ``k``.  A network of depth ``K`` has
widths ``N0 -> 2H -> ... -> 2H -> 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from .init import InitSpec


class Activation(str, enum.Enum):
    RELU = "relu"
    TANH = "tanh"
    LINEAR = "linear"


class Head(str, enum.Enum):
    """Output-layer activation."""

    LINEAR = "linear"
    TANH = "tanh"

    @property
    def activation(self) -> Activation:
        return Activation(self.value)


def _check_finite(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("activation input must be finite")
    return arr


def _scalar_or_array(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def activate(kind: Activation | str, v):
    kind = Activation(kind)
    arr = _check_finite(v)
    if kind is Activation.RELU:
        out = np.maximum(arr, 0.0)
    elif kind is Activation.TANH:
        out = np.tanh(arr)
    else:
        out = arr.copy()
    return _scalar_or_array(out, v)


def activate_prime(kind: Activation | str, v):
    """Derivative of :func:`activate`.

    The ReLU derivative is ``1`` at ``v == 0`` so that it coincides with the
    forward activation mask ``v >= 0``.
    """
    kind = Activation(kind)
    arr = _check_finite(v)
    if kind is Activation.RELU:
        out = (arr >= 0.0).astype(float)
    elif kind is Activation.TANH:
        out = 1.0 - np.tanh(arr) ** 2
    else:
        out = np.ones_like(arr)
    return _scalar_or_array(out, v)


@dataclass(frozen=True)
class FnnArchitecture:
    depth: int
    half_width: int
    input_dim: int = 1
    head: Head = Head.LINEAR

    def __post_init__(self):
        object.__setattr__(self, "head", Head(self.head))
        if int(self.depth) != self.depth or self.depth < 2:
            raise ValueError(f"depth K must be an integer >= 2, got {self.depth}")
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise ValueError(f"half_width H must be an integer >= 1, got {self.half_width}")
        if int(self.input_dim) != self.input_dim or self.input_dim < 1:
            raise ValueError(f"input_dim N0 must be an integer >= 1, got {self.input_dim}")

    @property
    def hidden_width(self) -> int:
        return 2 * self.half_width

    @property
    def widths(self) -> tuple[int, ...]:
        """``(N_0, N_1, ..., N_K)``."""
        return (self.input_dim,) + (self.hidden_width,) * (self.depth - 1) + (1,)

    @property
    def shapes(self) -> list[tuple[int, int]]:
        w = self.widths
        return [(w[k], w[k - 1]) for k in range(1, self.depth + 1)]

    @property
    def n_weights(self) -> int:
        return sum(r * c for r, c in self.shapes)


class FnnModel:
    """An immutable network: architecture plus ``K`` weight matrices.

    The stored arrays are private read-only copies; use :meth:`with_weights`
    to obtain a modified model.
    """

    __slots__ = ("arch", "weights", "init")

    def __init__(
        self,
        arch: FnnArchitecture,
        weights: Sequence[np.ndarray],
        init: Optional["InitSpec"] = None,
    ):
        weights = list(weights)
        if len(weights) != arch.depth:
            raise ValueError(f"expected {arch.depth} weight matrices, got {len(weights)}")
        frozen = []
        for k, (w, shape) in enumerate(zip(weights, arch.shapes), start=1):
            a = np.array(w, dtype=float, copy=True)
            if a.shape != shape:
                raise ValueError(f"W_{k} has shape {a.shape}, expected {shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"W_{k} contains non-finite entries")
            a.setflags(write=False)
            frozen.append(a)
        object.__setattr__(self, "arch", arch)
        object.__setattr__(self, "weights", tuple(frozen))
        object.__setattr__(self, "init", init)

    def __setattr__(self, name, value):
        raise AttributeError("FnnModel is immutable")

    def __repr__(self) -> str:
        a = self.arch
        return f"FnnModel(K={a.depth}, H={a.half_width}, N0={a.input_dim}, head={a.head.value})"

    def with_weights(self, weights: Sequence[np.ndarray]) -> "FnnModel":
        return FnnModel(self.arch, weights, self.init)

    def same_weights(self, other: "FnnModel") -> bool:
        """Bit-exact weight comparison."""
        return self.arch == other.arch and all(
            np.array_equal(a, b) for a, b in zip(self.weights, other.weights)
        )

    def forward(self, x) -> "ForwardTrace":
        return forward(self, x)

    def __call__(self, X) -> np.ndarray:
        """Network outputs for a batch ``X`` of shape ``(B, N0)`` or ``(B,)``."""
        return forward_batch(self, X).output


@dataclass(frozen=True)
class ForwardTrace:
    """Everything a single forward pass computes.

    ``pre_activations`` and ``activations`` hold one vector per layer
    ``k = 1..K`` (the last entry has length one); ``masks`` covers the
    ``K - 1`` hidden layers.
    """

    pre_activations: tuple[np.ndarray, ...]
    activations: tuple[np.ndarray, ...]
    masks: tuple[np.ndarray, ...]
    penultimate: np.ndarray
    penultimate_norm: float
    output: float

    @property
    def pre_head(self) -> float:
        return float(self.pre_activations[-1][0])


@dataclass(frozen=True)
class BatchTrace:
    """Row-stacked traces for a batch; row ``i`` belongs to sample ``i``."""

    inputs: np.ndarray
    pre_activations: tuple[np.ndarray, ...]
    activations: tuple[np.ndarray, ...]
    output: np.ndarray

    @property
    def penultimate(self) -> np.ndarray:
        return self.activations[-2]

    @property
    def penultimate_norm(self) -> np.ndarray:
        return row_norms(self.penultimate)

    @property
    def pre_head(self) -> np.ndarray:
        return self.pre_activations[-1][:, 0]

    def masks(self) -> list[np.ndarray]:
        return [v >= 0.0 for v in self.pre_activations[:-1]]

    def sample(self, i: int) -> ForwardTrace:
        pen = self.penultimate[i].copy()
        return ForwardTrace(
            pre_activations=tuple(v[i].copy() for v in self.pre_activations),
            activations=tuple(y[i].copy() for y in self.activations),
            masks=tuple((v[i] >= 0.0).astype(np.int8) for v in self.pre_activations[:-1]),
            penultimate=pen,
            penultimate_norm=math.hypot(*pen),
            output=float(self.output[i]),
        )


def row_norms(Y: np.ndarray) -> np.ndarray:
    """Euclidean norm of each row, scaled so tiny entries do not underflow to 0."""
    peak = np.max(np.abs(Y), axis=1) if Y.shape[1] else np.zeros(Y.shape[0])
    safe = np.where(peak > 0.0, peak, 1.0)
    return peak * np.sqrt(np.sum((Y / safe[:, None]) ** 2, axis=1))


def as_batch_inputs(X, input_dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1) if input_dim == 1 else X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != input_dim:
        raise ValueError(f"inputs of shape {X.shape} do not match input_dim {input_dim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs must be finite")
    return X


def _forward_arrays(weights: Sequence[np.ndarray], X: np.ndarray, head: Head):
    pre, acts = [], []
    y = X
    last = len(weights) - 1
    for k, W in enumerate(weights):
        v = y @ W.T
        pre.append(v)
        if k < last:
            y = np.maximum(v, 0.0)
        else:
            y = np.tanh(v) if head is Head.TANH else v
        acts.append(y)
    return pre, acts


def forward_batch(model: FnnModel, X) -> BatchTrace:
    """Vectorised forward pass over the rows of ``X``."""
    X = as_batch_inputs(X, model.arch.input_dim)
    pre, acts = _forward_arrays(model.weights, X, model.arch.head)
    return BatchTrace(X, tuple(pre), tuple(acts), acts[-1][:, 0])


def forward(model: FnnModel, x) -> ForwardTrace:
    x = np.asarray(x, dtype=float)
    if x.ndim > 1 or (x.ndim == 1 and x.shape[0] != model.arch.input_dim) or (
        x.ndim == 0 and model.arch.input_dim != 1
    ):
        raise ValueError(f"input of shape {x.shape} does not match input_dim {model.arch.input_dim}")
    return forward_batch(model, x.reshape(1, -1)).sample(0)


@dataclass(frozen=True)
class NetworkMetrics:
    total_neurons: int
    connectivity: int
    max_width: int
    max_abs_weight: float


def network_metrics(model: FnnModel) -> NetworkMetrics:
    widths = model.arch.widths
    return NetworkMetrics(
        total_neurons=int(sum(widths)),
        connectivity=int(sum(np.count_nonzero(W) for W in model.weights)),
        max_width=int(max(widths)),
        max_abs_weight=float(max(np.max(np.abs(W)) for W in model.weights)),
    )

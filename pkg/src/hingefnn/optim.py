"""SGD, SGD with momentum, RMSProp and Adam.

All variants consume gradients ``G = dL/dW`` and subtract.  The state holds
one buffer per parameter array, so the same code drives per-layer matrices
and the flat parameter vector the trainer uses.
"""
from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fnn import FnnModel
from .training import GradientSet


class Variant(str, enum.Enum):
    SGD = "sgd"
    MOMENTUM = "momentum"
    RMSPROP = "rmsprop"
    ADAM = "adam"


DEFAULTS = {
    Variant.SGD: dict(learning_rate=0.01),
    Variant.MOMENTUM: dict(learning_rate=0.01, momentum=0.9),
    Variant.RMSPROP: dict(learning_rate=0.01, rho=0.9, delta=1e-6),
    Variant.ADAM: dict(learning_rate=0.01, rho1=0.9, rho2=0.999, delta=1e-8),
}


@dataclass
class OptimizerState:
    variant: Variant
    learning_rate: float
    momentum: float = 0.0
    rho: float = 0.9
    rho1: float = 0.9
    rho2: float = 0.999
    delta: float = 1e-8
    velocities: list[np.ndarray] = field(default_factory=list)
    accumulators: list[np.ndarray] = field(default_factory=list)
    first_moments: list[np.ndarray] = field(default_factory=list)
    second_moments: list[np.ndarray] = field(default_factory=list)
    step_count: int = 0

    def copy(self) -> "OptimizerState":
        return copy.deepcopy(self)


def init_optimizer(variant: Variant | str, params: Sequence[np.ndarray] | FnnModel, **hyper) -> OptimizerState:
    """Fresh state with zero buffers shaped like ``params``.

    Unspecified hyperparameters take the variant defaults (Adam: 0.01, 0.9,
    0.999, 1e-8; RMSProp: rho 0.9, delta 1e-6).
    """
    variant = Variant(variant)
    if isinstance(params, FnnModel):
        params = params.weights
    settings = dict(DEFAULTS[variant])
    unknown = set(hyper) - {"learning_rate", "momentum", "rho", "rho1", "rho2", "delta"}
    if unknown:
        raise TypeError(f"unknown optimizer settings: {sorted(unknown)}")
    settings.update({k: v for k, v in hyper.items() if v is not None})
    state = OptimizerState(variant=variant, **settings)
    _validate(state)
    zeros = lambda: [np.zeros_like(np.asarray(p, dtype=float)) for p in params]  # noqa: E731
    if variant is Variant.MOMENTUM:
        state.velocities = zeros()
    elif variant is Variant.RMSPROP:
        state.accumulators = zeros()
    elif variant is Variant.ADAM:
        state.first_moments = zeros()
        state.second_moments = zeros()
    return state


def _validate(state: OptimizerState) -> None:
    if not state.learning_rate > 0:
        raise ValueError("learning_rate must be positive")
    if state.variant is Variant.MOMENTUM and not 0.0 <= state.momentum < 1.0:
        raise ValueError("momentum must lie in [0, 1)")
    if state.variant is Variant.RMSPROP and not 0.0 < state.rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if state.variant is Variant.ADAM and not (0.0 < state.rho1 < 1.0 and 0.0 < state.rho2 < 1.0):
        raise ValueError("rho1 and rho2 must lie in (0, 1)")
    if state.variant in (Variant.RMSPROP, Variant.ADAM) and not state.delta > 0:
        raise ValueError("delta must be positive")


def _buffers(state: OptimizerState) -> list[list[np.ndarray]]:
    return [b for b in (state.velocities, state.accumulators, state.first_moments, state.second_moments) if b]


def step_(state: OptimizerState, params: list[np.ndarray], grads: Sequence[np.ndarray]) -> None:
    """Apply one update in place to ``params`` and the state buffers."""
    eta = state.learning_rate
    v = state.variant
    if v is Variant.SGD:
        for W, G in zip(params, grads):
            W -= eta * G
    elif v is Variant.MOMENTUM:
        for W, G, V in zip(params, grads, state.velocities):
            V *= state.momentum
            V -= eta * G
            W += V
    elif v is Variant.RMSPROP:
        for W, G, R in zip(params, grads, state.accumulators):
            R *= state.rho
            R += (1.0 - state.rho) * G * G
            W -= eta * G / np.sqrt(state.delta + R)
    else:
        t = state.step_count + 1
        c1 = 1.0 - state.rho1 ** t
        c2 = 1.0 - state.rho2 ** t
        for W, G, S, R in zip(params, grads, state.first_moments, state.second_moments):
            S *= state.rho1
            S += (1.0 - state.rho1) * G
            R *= state.rho2
            R += (1.0 - state.rho2) * G * G
            W -= eta * (S / c1) / (np.sqrt(R / c2) + state.delta)
    state.step_count += 1


def optimizer_step(
    state: OptimizerState, grads: GradientSet | Sequence[np.ndarray], model: FnnModel
) -> tuple[FnnModel, OptimizerState]:
    """Functional update: returns a new model and a new state, inputs untouched."""
    G = list(grads.grads) if isinstance(grads, GradientSet) else [np.asarray(g, dtype=float) for g in grads]
    params = [np.array(W) for W in model.weights]
    if len(G) != len(params) or any(g.shape != p.shape for g, p in zip(G, params)):
        raise ValueError("gradient shapes do not match the model")
    for buf in _buffers(state):
        if len(buf) != len(params) or any(b.shape != p.shape for b, p in zip(buf, params)):
            raise ValueError("optimizer buffers do not match the model")
    if not all(np.all(np.isfinite(g)) for g in G):
        raise ValueError("non-finite gradient")
    new_state = state.copy()
    step_(new_state, params, G)
    return model.with_weights(params), new_state

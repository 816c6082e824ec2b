"""Misclassification-probability tools for trained networks.

The final output is split as ``Phi = Y + S`` where ``Y = w0 . y`` uses the
Gaussian-initialised last-layer row and ``S`` collects everything training
added to it.  Conditioned on a penultimate vector ``y``, ``Y`` is centred
Gaussian with variance ``alpha_init / (2H) * |y|^2``, which gives the
closed form used below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .fnn import FnnModel, forward_batch
from .init import init_model
from .rng import derive_rng

# erfc(z) for z >= 0, Chebyshev fit from Numerical Recipes (erfcc),
# fractional error below 1.2e-7 everywhere
_ERFC_COEFFS = (
    -1.26551223, 1.00002368, 0.37409196, 0.09678418, -0.18628806,
    0.27886807, -1.13520398, 1.48851587, -0.82215223, 0.17087277,
)


def _erfc_nonneg(z: np.ndarray) -> np.ndarray:
    t = 1.0 / (1.0 + 0.5 * z)
    poly = np.zeros_like(z)
    for c in reversed(_ERFC_COEFFS[1:]):
        poly = t * (c + poly)
    with np.errstate(invalid="ignore", over="ignore"):
        out = t * np.exp(-z * z + _ERFC_COEFFS[0] + poly)
    return np.where(np.isinf(z), 0.0, out)


def q_function(x):
    """Gaussian tail ``P(Z > x)``; accepts scalars or arrays, including +-inf.

    Negative arguments use ``1 - Q(-x)`` and ``Q(0)`` is pinned to 1/2 (the fit
    itself is 3e-8 high there), so ``Q(x) + Q(-x) = 1`` holds exactly.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("q_function is undefined for NaN")
    upper = 0.5 * _erfc_nonneg(np.abs(arr) / math.sqrt(2.0))
    out = np.where(arr > 0.0, upper, np.where(arr < 0.0, 1.0 - upper, 0.5))
    return float(out) if out.ndim == 0 else out


def lemma1_indicator(label, phi):
    """``(label != sgn(phi), label * phi <= 0)`` as 0/1 values.

    ``sgn(0) = 0`` never equals a label, so a zero output counts as an error
    under both forms.
    """
    lab = np.asarray(label)
    if not np.all((lab == 1) | (lab == -1)):
        raise ValueError("labels must be -1 or +1")
    p = np.asarray(phi, dtype=float)
    via_sign = (lab != np.sign(p)).astype(int)
    via_product = (lab * p <= 0.0).astype(int)
    if via_sign.ndim == 0:
        return int(via_sign), int(via_product)
    return via_sign, via_product


@dataclass(frozen=True)
class PeDecomposition:
    """Penultimate norms per hypothesis and empirical shift samples ``S``."""

    half_width: int
    alpha_init: float
    norm_m1: float
    norm_p1: float
    s_m1: np.ndarray
    s_p1: np.ndarray

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError("half_width must be >= 1")
        if self.alpha_init <= 0:
            raise ValueError("alpha_init must be positive")
        for name in ("norm_m1", "norm_p1"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative")
            object.__setattr__(self, name, v)
        for name in ("s_m1", "s_p1"):
            a = np.array(getattr(self, name), dtype=float).ravel()
            if a.size == 0 or not np.all(np.isfinite(a)):
                raise ValueError(f"{name} must be a nonempty list of finite values")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def gain(self) -> float:
        """``sqrt(2H / alpha_init)``, the inverse standard deviation of a unit-norm ``Y``."""
        return math.sqrt(2.0 * self.half_width / self.alpha_init)

    def scaled(self, factor: float) -> "PeDecomposition":
        """Scale both norms, keeping the shift samples fixed."""
        return replace(self, norm_m1=self.norm_m1 * factor, norm_p1=self.norm_p1 * factor)


def closed_form_pe(d: PeDecomposition) -> float:
    """Average of the two conditional error probabilities, ``S`` averaged empirically."""
    if d.norm_m1 == 0.0 or d.norm_p1 == 0.0:
        raise ValueError("zero penultimate norm: use zero_norm_pe for this limit")
    g = d.gain
    p_m1 = float(np.mean(q_function(-d.s_m1 * g / d.norm_m1)))
    p_p1 = float(np.mean(q_function(d.s_p1 * g / d.norm_p1)))
    return 0.5 * (p_m1 + p_p1)


class SimulatedPe(NamedTuple):
    pe: float
    stderr: float
    pe_m1: float
    pe_p1: float
    n_draws: int


def _check_vector(y, norm: float, name: str) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if abs(float(np.linalg.norm(y)) - norm) > 1e-9 * max(1.0, norm):
        raise ValueError(f"|{name}| = {np.linalg.norm(y)!r} does not match the stated norm {norm!r}")
    return y


def simulate_pe_detailed(
    d: PeDecomposition, y_m1, y_p1, n_draws: int = 10**6, seed: int = 0, chunk: int = 100_000
) -> SimulatedPe:
    """Direct simulation: fresh last-layer rows ``w ~ N(0, alpha/2H I)`` per draw.

    Each draw uses one ``w`` for both hypotheses and an independent shift
    sample for each; the standard error is over the per-draw average.
    """
    if n_draws < 10**4:
        raise ValueError("n_draws must be at least 1e4")
    ym = _check_vector(y_m1, d.norm_m1, "y_m1")
    yp = _check_vector(y_p1, d.norm_p1, "y_p1")
    if ym.shape != yp.shape:
        raise ValueError("penultimate vectors must have equal length")
    sd = math.sqrt(d.alpha_init / (2.0 * d.half_width))
    rng = derive_rng(seed, "simulate_pe")
    err_m1 = err_p1 = sq = 0.0
    done = 0
    while done < n_draws:
        m = min(chunk, n_draws - done)
        w = rng.normal(0.0, sd, size=(m, ym.size))
        sm = d.s_m1[rng.integers(0, d.s_m1.size, size=m)]
        sp = d.s_p1[rng.integers(0, d.s_p1.size, size=m)]
        a = (w @ ym + sm > 0.0).astype(float)
        b = (w @ yp + sp < 0.0).astype(float)
        err_m1 += a.sum()
        err_p1 += b.sum()
        sq += np.sum((0.5 * (a + b)) ** 2)
        done += m
    pm, pp = err_m1 / n_draws, err_p1 / n_draws
    pe = 0.5 * (pm + pp)
    var = max(sq / n_draws - pe * pe, 0.0)
    return SimulatedPe(pe, math.sqrt(var / n_draws), pm, pp, n_draws)


def simulate_pe(d: PeDecomposition, y_m1, y_p1, n_draws: int = 10**6, seed: int = 0) -> float:
    return simulate_pe_detailed(d, y_m1, y_p1, n_draws, seed).pe


def _penultimate(model: FnnModel, x: np.ndarray, chunk: int = 200_000):
    norms, phis, pens = [], [], []
    for i in range(0, len(x), chunk):
        tr = forward_batch(model, x[i:i + chunk])
        pens.append(tr.penultimate)
        norms.append(tr.penultimate_norm)
        phis.append(tr.output)
    return np.concatenate(pens), np.concatenate(norms), np.concatenate(phis)


def zero_norm_pe(model: FnnModel, testset) -> float:
    """Error rate of a network whose penultimate outputs all vanish: exactly 1.

    Raises if any test sample reaches the last layer with a nonzero vector.
    """
    x = np.asarray(testset.x, dtype=float)
    labels = np.asarray(testset.labels)
    if x.size == 0:
        raise ValueError("empty test set")
    _, norms, phi = _penultimate(model, x)
    bad = np.flatnonzero(norms != 0.0)
    if bad.size:
        raise ValueError(f"{bad.size} samples have a nonzero penultimate output (first at index {bad[0]})")
    return float(np.mean(labels * phi <= 0.0))


@dataclass(frozen=True)
class SampleDecomposition:
    """``Y``/``S`` split of a trained model evaluated on a labelled set.

    ``norms`` and ``shifts`` are per sample; the initial last-layer row is
    regenerated from the model's init provenance.
    """

    half_width: int
    alpha_init: float
    labels: np.ndarray
    norms: np.ndarray
    shifts: np.ndarray
    y_init: np.ndarray
    penultimate: np.ndarray

    @property
    def gain(self) -> float:
        return math.sqrt(2.0 * self.half_width / self.alpha_init)

    def scaled(self, factor: float) -> "SampleDecomposition":
        return replace(self, norms=self.norms * factor, penultimate=self.penultimate * factor)

    def pointwise_pe(self) -> float:
        """List-averaged form: each test vector uses its own norm and shift.

        A zero norm leaves ``Phi = S``, which is an error whenever
        ``label * S <= 0``.
        """
        labels = self.labels
        out = np.empty(labels.size)
        nz = self.norms > 0.0
        arg = np.zeros(labels.size)
        arg[nz] = labels[nz] * self.shifts[nz] * self.gain / self.norms[nz]
        out[nz] = q_function(arg[nz])
        out[~nz] = (labels[~nz] * self.shifts[~nz] <= 0.0).astype(float)
        parts = [out[labels == lab].mean() for lab in (-1, 1) if np.any(labels == lab)]
        return float(np.mean(parts))

    def per_vector(self, i_m1: int, i_p1: int) -> PeDecomposition:
        """Per-vector form: the norms of two chosen samples, shifts from each hypothesis."""
        if self.labels[i_m1] != -1 or self.labels[i_p1] != 1:
            raise ValueError("i_m1 must index a -1 sample and i_p1 a +1 sample")
        return PeDecomposition(
            self.half_width,
            self.alpha_init,
            float(self.norms[i_m1]),
            float(self.norms[i_p1]),
            self.shifts[self.labels == -1],
            self.shifts[self.labels == 1],
        )


def decompose_model(model: FnnModel, testset) -> SampleDecomposition:
    if model.init is None:
        raise ValueError("model carries no init provenance; the initial last layer cannot be rebuilt")
    x = np.asarray(testset.x, dtype=float)
    labels = np.asarray(testset.labels)
    if x.size == 0:
        raise ValueError("empty test set")
    w0 = init_model(model.arch, model.init).weights[-1][0]
    wk = model.weights[-1][0]
    pen, norms, _ = _penultimate(model, x)
    return SampleDecomposition(
        half_width=model.arch.half_width,
        alpha_init=model.init.alpha_init,
        labels=labels,
        norms=norms,
        shifts=pen @ (wk - w0),
        y_init=pen @ w0,
        penultimate=pen,
    )

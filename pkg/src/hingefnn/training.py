"""Hinge loss, back-propagation, a finite-difference oracle and the norm constraint."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fnn import FnnArchitecture, FnnModel, Head, _forward_arrays, as_batch_inputs
from .init import InitKind, InitSpec, init_model


def _check_labels(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not np.all((t == 1.0) | (t == -1.0)):
        raise ValueError("labels must be -1 or +1")
    return t


def hinge_loss(t, y):
    """``max(0, 1 - t*y)``; works elementwise on arrays."""
    t = _check_labels(t)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("prediction must be finite")
    out = np.maximum(0.0, 1.0 - t * y)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GradientSet:
    """Mean-batch hinge-loss gradients ``dL/dW_k`` (optimisers subtract these)."""

    grads: tuple[np.ndarray, ...]
    batch_size: int
    mean_loss: float

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(g))) for g in self.grads)


def as_batch(batch, input_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalise a batch to ``(X, labels)``.

    Accepts an ``(X, labels)`` tuple whose labels are a numpy array, or an
    iterable of ``(x, label)`` samples.
    """
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[1], np.ndarray):
        X, t = batch
    else:
        pairs = list(batch)
        if not pairs:
            raise ValueError("batch is empty")
        X = [np.atleast_1d(np.asarray(x, dtype=float)) for x, _ in pairs]
        t = [lab for _, lab in pairs]
    t = _check_labels(t)
    if t.size == 0:
        raise ValueError("batch is empty")
    X = as_batch_inputs(np.asarray(X, dtype=float).reshape(len(t), -1), input_dim)
    return X, t


def mean_hinge(model: FnnModel, X: np.ndarray, t: np.ndarray) -> float:
    _, acts = _forward_arrays(model.weights, X, model.arch.head)
    return float(np.mean(np.maximum(0.0, 1.0 - t * acts[-1][:, 0])))


def _backprop_arrays(weights, head: Head, X: np.ndarray, t: np.ndarray, out=None):
    """Core recursion on raw arrays; returns ``(grads, summed_loss)``.

    ``out`` may supply preallocated gradient buffers (written in place).
    """
    pre, acts = _forward_arrays(weights, X, head)
    B = X.shape[0]
    phi = acts[-1][:, 0]
    margin = 1.0 - t * phi
    active = margin > 0.0
    loss_sum = float(np.sum(margin[active]))

    # delta_K = label * head'(v_K), gated by the strict hinge indicator
    if head is Head.TANH:
        delta = t * (1.0 - phi * phi)
    else:
        delta = t.copy()
    delta = (delta * active / B)[:, None]

    K = len(weights)
    grads = out if out is not None else [None] * K
    for k in range(K - 1, -1, -1):
        y_prev = acts[k - 1] if k > 0 else X
        if out is not None:
            np.matmul(delta.T, y_prev, out=grads[k])
            np.negative(grads[k], out=grads[k])
        else:
            grads[k] = -(delta.T @ y_prev)
        if k > 0:
            delta = (delta @ weights[k]) * (pre[k - 1] >= 0.0)
    return grads, loss_sum


def backprop_batch(model: FnnModel, batch) -> GradientSet:
    """Gradients of the mean batch hinge loss via the local-gradient recursion.

    For sample ``i`` with margin ``f_i = label_i * Phi(x_i)`` the head local
    gradient is ``label_i * head'(v_K)``; hidden local gradients follow
    ``delta_k = relu'(v_k) * (W_{k+1}^T delta_{k+1})``.  Only samples with
    ``1 - f_i > 0`` contribute.
    """
    X, t = as_batch(batch, model.arch.input_dim)
    grads, loss_sum = _backprop_arrays(model.weights, model.arch.head, X, t)
    for g in grads:
        g.setflags(write=False)
    return GradientSet(tuple(grads), len(t), loss_sum / len(t))


def _activation_pattern(weights, head, X, t) -> tuple:
    pre, acts = _forward_arrays(weights, X, head)
    masks = tuple((v >= 0.0).tobytes() for v in pre[:-1])
    return masks + ((1.0 - t * acts[-1][:, 0] > 0.0).tobytes(),)


def central_differences(model: FnnModel, batch, h: float = 1e-5, track_kinks: bool = False):
    """Central differences of the mean batch hinge loss, one weight at a time.

    With ``track_kinks`` also returns boolean arrays marking coordinates whose
    ``+h`` and ``-h`` evaluations see different ReLU masks or hinge
    indicators, i.e. where the difference straddles a kink.
    """
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    X, t = as_batch(batch, model.arch.input_dim)
    head = model.arch.head
    work = [np.array(W) for W in model.weights]

    def loss() -> float:
        _, acts = _forward_arrays(work, X, head)
        return float(np.mean(np.maximum(0.0, 1.0 - t * acts[-1][:, 0])))

    grads = [np.zeros_like(W) for W in work]
    kinks = [np.zeros(W.shape, dtype=bool) for W in work]
    for k, W in enumerate(work):
        for idx in np.ndindex(W.shape):
            orig = W[idx]
            W[idx] = orig + h
            lp = loss()
            pat_p = _activation_pattern(work, head, X, t) if track_kinks else None
            W[idx] = orig - h
            lm = loss()
            if track_kinks:
                kinks[k][idx] = pat_p != _activation_pattern(work, head, X, t)
            W[idx] = orig
            grads[k][idx] = (lp - lm) / (2.0 * h)
    if track_kinks:
        return grads, kinks
    return grads


def finite_diff_gradients(model: FnnModel, batch, h: float = 1e-5) -> GradientSet:
    X, t = as_batch(batch, model.arch.input_dim)
    grads = central_differences(model, (X, t), h)
    return GradientSet(tuple(grads), len(t), mean_hinge(model, X, t))


def constrain_rows_(W: np.ndarray, cmin: float, cmax: float, eps: float = 0.0) -> np.ndarray:
    """In-place min/max norm projection of every row of ``W``."""
    norms = np.sqrt(np.einsum("ij,ij->i", W, W))
    target = np.clip(norms, cmin, cmax)
    if eps > 0.0:
        scale = target / (eps + norms)
    else:
        scale = np.divide(target, norms, out=np.zeros_like(norms), where=norms > 0.0)
    W *= scale[:, None]
    return W


def apply_weight_constraint(
    model: FnnModel, cmin: float = 1.0, cmax: float = 5.0, eps: float = 0.0
) -> FnnModel:
    """Rescale each neuron's incoming-weight row so its norm lies in ``[cmin, cmax]``.

    With the default ``eps=0`` the projection is exact (rows inside the band
    are untouched, all-zero rows stay zero).  ``eps > 0`` reproduces the
    ``clip(n) / (eps + n)`` form used by common deep-learning toolkits.
    """
    if not (0 < cmin <= cmax):
        raise ValueError(f"need 0 < cmin <= cmax, got ({cmin}, {cmax})")
    new = [constrain_rows_(np.array(W), cmin, cmax, eps) for W in model.weights]
    return model.with_weights(new)


@dataclass(frozen=True)
class GradCheckResult:
    max_rel_error: float
    n_checked: int
    n_excluded: int


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """``|a - b| / max(|a|, |b|, floor)``; the floor keeps round-off on near-zero
    gradients from reading as a large relative error."""
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def check_gradients(
    model: FnnModel, batch, h: float = 1e-5, window: float = 1e-6
) -> GradCheckResult:
    """Compare :func:`backprop_batch` against central differences.

    Coordinates are excluded when the batch has a pre-activation or hinge
    margin within ``window`` of its kink, or when the ``+-h`` evaluations
    straddle a kink.
    """
    X, t = as_batch(batch, model.arch.input_dim)
    analytic = backprop_batch(model, (X, t)).grads
    numeric, straddled = central_differences(model, (X, t), h, track_kinks=True)

    pre, acts = _forward_arrays(model.weights, X, model.arch.head)
    near_kink = any(np.any(np.abs(v) < window) for v in pre[:-1])
    near_kink |= bool(np.any(np.abs(1.0 - t * acts[-1][:, 0]) < window))

    worst, checked, excluded = 0.0, 0, 0
    for a, n, s in zip(analytic, numeric, straddled):
        keep = ~s if not near_kink else np.zeros_like(s)
        excluded += int(np.count_nonzero(~keep))
        if np.any(keep):
            checked += int(np.count_nonzero(keep))
            worst = max(worst, float(np.max(relative_error(a[keep], n[keep]))))
    return GradCheckResult(worst, checked, excluded)


def random_gradcheck_case(
    rng: np.random.Generator,
    depth_range: tuple[int, int] = (2, 6),
    half_width_range: tuple[int, int] = (1, 8),
    max_batch: int = 8,
    head: Head | None = None,
    input_dim: int = 1,
):
    """A random ``(model, (X, labels))`` pair for gradient certification.

    Inputs are drawn around the BPSK operating range and He-normal weights are
    used, so both active and inactive hinge samples occur.
    """
    K = int(rng.integers(depth_range[0], depth_range[1] + 1))
    H = int(rng.integers(half_width_range[0], half_width_range[1] + 1))
    head = Head(head) if head is not None else (Head.LINEAR if rng.random() < 0.5 else Head.TANH)
    arch = FnnArchitecture(K, H, input_dim, head)
    model = init_model(arch, InitSpec(InitKind.HE_NORMAL, int(rng.integers(0, 2**32))))
    B = int(rng.integers(1, max_batch + 1))
    X = rng.normal(0.0, 1.5, size=(B, input_dim))
    t = rng.choice([-1.0, 1.0], size=B)
    return model, (X, t)

"""Training loop with plateau callbacks, evaluation and penultimate-norm scatter."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ..bpsk import LabeledDataset, assemble_scheme, db_to_linear, optimal_pe
from ..fnn import FnnModel, _forward_arrays, forward_batch
from ..init import InitSpec, init_model
from ..optim import init_optimizer, step_
from ..rng import derive_rng, derive_seed
from ..training import _backprop_arrays, constrain_rows_
from .config import ExperimentConfig

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, what: str):
        super().__init__(f"non-finite {what} at epoch {epoch}")
        self.epoch = epoch


class PlateauCounter:
    """Patience bookkeeping shared by early stopping and LR reduction.

    An epoch improves when the monitored value drops below the best seen so
    far by at least ``min_delta``.
    """

    def __init__(self, patience: int, min_delta: float = 1e-6):
        self.patience = patience
        self.min_delta = min_delta
        self.best = math.inf
        self.wait = 0

    def update(self, value: float) -> bool:
        """Record an epoch; returns True when patience has run out."""
        if value < self.best - self.min_delta:
            self.best = value
            self.wait = 0
            return False
        self.wait += 1
        return self.wait >= self.patience


@dataclass
class TrainReport:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    initial_train_loss: float = math.nan
    initial_val_loss: float = math.nan
    stop_epoch: int = 0
    stop_reason: str = ""
    best_epoch: int = 0
    lr_reductions: list[int] = field(default_factory=list)
    model: Optional[FnnModel] = None

    @property
    def epochs(self) -> list[int]:
        return list(range(1, len(self.train_loss) + 1))


class _FlatParams:
    """All weight matrices as views into one contiguous vector."""

    def __init__(self, model: FnnModel):
        self.shapes = model.arch.shapes
        self.flat = np.concatenate([W.ravel() for W in model.weights])
        self.grad = np.zeros_like(self.flat)
        self.views = self._views(self.flat)
        self.grad_views = self._views(self.grad)

    def _views(self, buf: np.ndarray) -> list[np.ndarray]:
        out, o = [], 0
        for r, c in self.shapes:
            out.append(buf[o:o + r * c].reshape(r, c))
            o += r * c
        return out


def _hinge_and_acc(weights, head, X, t) -> tuple[float, float]:
    _, acts = _forward_arrays(weights, X, head)
    phi = acts[-1][:, 0]
    return float(np.mean(np.maximum(0.0, 1.0 - t * phi))), float(np.mean(t * phi > 0.0))


def split_dataset(data: LabeledDataset, val_fraction: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded uniform shuffle, then a ``1 - val_fraction`` / ``val_fraction`` cut."""
    n = len(data)
    n_val = int(round(n * val_fraction))
    if n_val < 1 or n - n_val < 1:
        raise ValueError(f"dataset of {n} samples is too small for a {val_fraction:.0%} validation split")
    perm = derive_rng(seed, "split").permutation(n)
    return data.subset(perm[: n - n_val]), data.subset(perm[n - n_val:])


def train_model(
    config: ExperimentConfig, train: LabeledDataset, val: LabeledDataset, model: FnnModel
) -> tuple[FnnModel, TrainReport]:
    """Mini-batch training from ``model`` with the configured callbacks."""
    B = config.batch_size
    if len(train) < B:
        raise ValueError(f"batch_size {B} exceeds the {len(train)} training samples")
    head = model.arch.head
    Xtr = train.x.reshape(-1, 1)
    ttr = train.labels.astype(float)
    Xva = val.x.reshape(-1, 1)
    tva = val.labels.astype(float)

    params = _FlatParams(model)
    opt = init_optimizer(config.optimizer, [params.flat], **config.optimizer_settings())
    flat_list, grad_list = [params.flat], [params.grad]
    cons = config.constraint

    report = TrainReport()
    report.initial_train_loss, _ = _hinge_and_acc(params.views, head, Xtr, ttr)
    report.initial_val_loss, _ = _hinge_and_acc(params.views, head, Xva, tva)
    stopper = PlateauCounter(config.early_stop_patience, config.min_delta)
    reducer = PlateauCounter(config.lr_reduce_patience, config.min_delta)
    best_val, best_flat = math.inf, params.flat.copy()

    n = len(train)
    # divergence is detected explicitly below, so silence numpy's overflow chatter
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.max_epochs + 1):
            order = derive_rng(config.seed, "epoch", epoch).permutation(n)
            Xs, ts = Xtr[order], ttr[order]
            loss_sum = 0.0
            for lo in range(0, n, B):
                Xb, tb = Xs[lo:lo + B], ts[lo:lo + B]
                _, bl = _backprop_arrays(params.views, head, Xb, tb, out=params.grad_views)
                loss_sum += bl
                step_(opt, flat_list, grad_list)
                if cons is not None:
                    for W in params.views:
                        constrain_rows_(W, cons[0], cons[1])
            train_loss = loss_sum / n
            if not np.isfinite(train_loss) or not np.all(np.isfinite(params.flat)):
                raise TrainingDiverged(epoch, "training loss")
            val_loss, val_acc = _hinge_and_acc(params.views, head, Xva, tva)
            if not np.isfinite(val_loss):
                raise TrainingDiverged(epoch, "validation loss")

            report.train_loss.append(train_loss)
            report.val_loss.append(val_loss)
            report.val_acc.append(val_acc)
            report.lr.append(opt.learning_rate)
            log.debug("epoch %d loss %.6f val %.6f acc %.4f lr %g", epoch, train_loss, val_loss, val_acc, opt.learning_rate)

            if val_loss < best_val:
                best_val, report.best_epoch = val_loss, epoch
                best_flat[:] = params.flat
            stop = stopper.update(val_loss)
            if reducer.update(val_loss):
                opt.learning_rate *= config.lr_reduce_factor
                reducer.wait = 0
                report.lr_reductions.append(epoch)
            if stop:
                report.stop_epoch, report.stop_reason = epoch, "early_stopping"
                break
        else:
            report.stop_epoch, report.stop_reason = config.max_epochs, "max_epochs"

    if config.keep_best:
        params.flat[:] = best_flat
    final = model.with_weights([np.array(W) for W in params.views])
    report.model = final
    return final, report


def build_model(config: ExperimentConfig) -> FnnModel:
    return init_model(config.arch, InitSpec(config.init, derive_seed(config.seed, "init")))


def train_experiment(config: ExperimentConfig) -> tuple[FnnModel, TrainReport]:
    """Generate the scheme's data, split it and train a freshly initialised model."""
    data = assemble_scheme(config.scheme, config.per_snr_train_n, config.seed)
    train, val = split_dataset(data, config.val_fraction, config.seed)
    return train_model(config, train, val, build_model(config))


class SnrRow(NamedTuple):
    snr_db: float
    pe: float
    optimal_pe: float
    n: int
    errors: int


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[SnrRow, ...]
    overall_pe: float
    n: int

    def pe_at(self, snr_db: float) -> float:
        for r in self.rows:
            if r.snr_db == snr_db:
                return r.pe
        raise KeyError(snr_db)


def _outputs(model: FnnModel, x: np.ndarray, chunk: int = 200_000):
    phi, norms = [], []
    for i in range(0, len(x), chunk):
        tr = forward_batch(model, x[i:i + chunk])
        phi.append(tr.output)
        norms.append(tr.penultimate_norm)
    return np.concatenate(phi), np.concatenate(norms)


def evaluate_model(model: FnnModel, testset: LabeledDataset) -> EvalReport:
    """Per-SNR error rates with ``label * Phi <= 0`` counted as an error."""
    if len(testset) == 0:
        raise ValueError("empty test set")
    phi, _ = _outputs(model, testset.x)
    wrong = testset.labels * phi <= 0.0
    rows = []
    for snr in testset.snr_points():
        sel = testset.snr_db == snr
        n, e = int(sel.sum()), int(wrong[sel].sum())
        rows.append(SnrRow(float(snr), e / n, float(optimal_pe(db_to_linear(snr))), n, e))
    total = sum(r.errors for r in rows)
    return EvalReport(tuple(rows), total / len(testset), len(testset))


class NormScatterRecord(NamedTuple):
    n: int
    snr_db: float
    penultimate_norm: float
    label: int
    phi: float
    misclassified: int


@dataclass(frozen=True)
class ScatterTable:
    """Column form of the scatter records (cheap for large test sets)."""

    snr_db: np.ndarray
    norm: np.ndarray
    label: np.ndarray
    phi: np.ndarray
    misclassified: np.ndarray

    def __len__(self) -> int:
        return len(self.norm)

    def records(self) -> list[NormScatterRecord]:
        return [
            NormScatterRecord(i, float(s), float(nm), int(lb), float(p), int(m))
            for i, (s, nm, lb, p, m) in enumerate(
                zip(self.snr_db, self.norm, self.label, self.phi, self.misclassified)
            )
        ]

    @classmethod
    def from_records(cls, records) -> "ScatterTable":
        records = list(records)
        col = lambda i, dt: np.array([r[i] for r in records], dtype=dt)  # noqa: E731
        return cls(col(1, float), col(2, float), col(3, np.int64), col(4, float), col(5, np.int64))


def scatter_table(model: FnnModel, testset: LabeledDataset) -> ScatterTable:
    if len(testset) == 0:
        raise ValueError("empty test set")
    phi, norms = _outputs(model, testset.x)
    wrong = (testset.labels * phi <= 0.0).astype(np.int64)
    return ScatterTable(testset.snr_db.copy(), norms, testset.labels.copy(), phi, wrong)


def norm_scatter(model: FnnModel, testset: LabeledDataset) -> list[NormScatterRecord]:
    """One record per test sample, in test-set order."""
    return scatter_table(model, testset).records()

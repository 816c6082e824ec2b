"""CSV report files plus the matching figures."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

from .experiment import EvalReport, ScatterTable, TrainReport
from .plotting import save_loss_plot, save_scatter_plot

METRICS_HEADER = ("epoch", "train_loss", "val_loss", "val_acc", "lr")
EVAL_HEADER = ("snr_db", "pe", "optimal_pe", "n")
SCATTER_HEADER = ("n", "snr_db", "norm", "label", "phi", "miscls")


def _g(v: float) -> str:
    return f"{v:.17g}"


def _write_csv(path: Path, header, rows) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_metrics_csv(report: TrainReport, path) -> Path:
    rows = (
        (e, _g(tl), _g(vl), _g(va), _g(lr))
        for e, tl, vl, va, lr in zip(report.epochs, report.train_loss, report.val_loss, report.val_acc, report.lr)
    )
    return _write_csv(Path(path), METRICS_HEADER, rows)


def write_eval_csv(report: EvalReport, path) -> Path:
    rows = ((_g(r.snr_db), _g(r.pe), _g(r.optimal_pe), r.n) for r in report.rows)
    return _write_csv(Path(path), EVAL_HEADER, rows)


def write_scatter_csv(table: ScatterTable, path) -> Path:
    rows = (
        (i, _g(s), _g(nm), int(lb), _g(p), int(m))
        for i, (s, nm, lb, p, m) in enumerate(
            zip(table.snr_db, table.norm, table.label, table.phi, table.misclassified)
        )
    )
    return _write_csv(Path(path), SCATTER_HEADER, rows)


def emit_reports(
    out_dir,
    train: Optional[TrainReport] = None,
    evaluation: Optional[EvalReport] = None,
    scatter=None,
    title: str = "",
) -> list[Path]:
    """Write whichever reports are given; returns the files written.

    ``scatter`` may be a :class:`ScatterTable` or a list of records.  Output
    is byte-identical for identical inputs.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    written = []
    if train is not None:
        written.append(write_metrics_csv(train, out / "metrics.csv"))
        written.append(save_loss_plot(train, out / "loss.svg"))
    if evaluation is not None:
        written.append(write_eval_csv(evaluation, out / "eval.csv"))
    if scatter is not None:
        if not isinstance(scatter, ScatterTable):
            scatter = ScatterTable.from_records(scatter)
        written.append(write_scatter_csv(scatter, out / "scatter.csv"))
        written.append(save_scatter_plot(scatter, out / "scatter.svg", title))
    return written

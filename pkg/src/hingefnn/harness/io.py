"""Checkpoint and dataset files.

Checkpoints are JSON documents.  Python writes floats with the shortest
repr that reads back to the same double, so weights round-trip exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..bpsk import LabeledDataset
from ..fnn import FnnArchitecture, FnnModel
from ..init import InitSpec

FORMAT = "hingefnn-checkpoint"
VERSION = 1
DATASET_HEADER = "x,y,snr_db"


class CheckpointError(ValueError):
    pass


def model_to_dict(model: FnnModel) -> dict:
    a = model.arch
    return {
        "format": FORMAT,
        "version": VERSION,
        "arch": {"K": a.depth, "H": a.half_width, "N0": a.input_dim, "head": a.head.value},
        "init": None if model.init is None else {"kind": model.init.kind.value, "seed": int(model.init.seed)},
        "weights": [W.tolist() for W in model.weights],
    }


def model_from_dict(doc: dict, source: str = "<checkpoint>") -> FnnModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CheckpointError(f"{source}: not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise CheckpointError(f"{source}: unsupported version {doc.get('version')!r}")
    try:
        a = doc["arch"]
        arch = FnnArchitecture(int(a["K"]), int(a["H"]), int(a["N0"]), a["head"])
        init = None if doc.get("init") is None else InitSpec(doc["init"]["kind"], int(doc["init"]["seed"]))
        blocks = doc["weights"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{source}: bad header: {exc}") from exc
    if not isinstance(blocks, list) or len(blocks) != arch.depth:
        n = len(blocks) if isinstance(blocks, list) else "no"
        raise CheckpointError(f"{source}: header says K={arch.depth} but found {n} weight blocks")
    weights = []
    for k, (b, shape) in enumerate(zip(blocks, arch.shapes), start=1):
        try:
            W = np.array(b, dtype=float)
        except (TypeError, ValueError) as exc:
            raise CheckpointError(f"{source}: W_{k} is not a numeric matrix") from exc
        if W.shape != shape:
            raise CheckpointError(f"{source}: W_{k} has shape {W.shape}, header implies {shape}")
        weights.append(W)
    try:
        return FnnModel(arch, weights, init)
    except ValueError as exc:
        raise CheckpointError(f"{source}: {exc}") from exc


def save_checkpoint(model: FnnModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model), indent=1) + "\n")
    return path


def load_checkpoint(path) -> FnnModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(doc, str(path))


def save_dataset(data: LabeledDataset, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(DATASET_HEADER + "\n")
        for x, y, s in zip(data.x, data.labels, data.snr_db):
            fh.write(f"{x:.17g},{int(y)},{s:.17g}\n")
    return path


def load_dataset(path) -> LabeledDataset:
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != DATASET_HEADER:
            raise ValueError(f"{path}: expected header {DATASET_HEADER!r}, got {header!r}")
        try:
            table = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from exc
    if table.size == 0:
        return LabeledDataset(np.empty(0), np.empty(0, dtype=np.int64), np.empty(0), str(path))
    if table.shape[1] != 3:
        raise ValueError(f"{path}: expected 3 columns, got {table.shape[1]}")
    return LabeledDataset(table[:, 0], table[:, 1].astype(np.int64), table[:, 2], str(path))

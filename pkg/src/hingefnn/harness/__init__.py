"""Experiment harness: configuration, training, evaluation, files and CLI."""
from .config import ExperimentConfig, format_config, load_config, parse_config
from .experiment import (
    EvalReport,
    NormScatterRecord,
    PlateauCounter,
    ScatterTable,
    SnrRow,
    TrainingDiverged,
    TrainReport,
    build_model,
    evaluate_model,
    norm_scatter,
    scatter_table,
    split_dataset,
    train_experiment,
    train_model,
)
from .io import CheckpointError, load_checkpoint, load_dataset, save_checkpoint, save_dataset
from .reports import emit_reports

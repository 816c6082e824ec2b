"""Biasless ReLU networks trained with hinge loss, and tools for studying
how they fare as BPSK detectors."""
from .bpsk import (
    SNR_GRID_DB,
    LabeledDataset,
    LabeledSample,
    Scheme,
    assemble_scheme,
    generate_samples,
    optimal_detect,
    optimal_pe,
    test_set,
)
from .fnn import (
    Activation,
    BatchTrace,
    FnnArchitecture,
    FnnModel,
    ForwardTrace,
    Head,
    NetworkMetrics,
    activate,
    activate_prime,
    forward,
    forward_batch,
    network_metrics,
)
from .init import InitKind, InitSpec, init_model
from .optim import OptimizerState, Variant, init_optimizer, optimizer_step
from .theory import (
    PeDecomposition,
    SampleDecomposition,
    closed_form_pe,
    decompose_model,
    lemma1_indicator,
    q_function,
    simulate_pe,
    simulate_pe_detailed,
    zero_norm_pe,
)
from .training import (
    GradientSet,
    apply_weight_constraint,
    backprop_batch,
    check_gradients,
    finite_diff_gradients,
    hinge_loss,
)

__version__ = "0.1.0"

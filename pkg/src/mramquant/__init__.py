"""Channel quantization design for the STT-MRAM read channel."""

from .bounds import (
    BoundsReport,
    FiniteBlocklengthQuery,
    bounds_report,
    capacity,
    capacity_derivative,
    cutoff_rate,
    cutoff_rate_derivative,
    dispersion,
    ppv_blep,
    ppv_max_rate,
    unquantized_mutual_information,
)
from .channel import (
    ChannelParams,
    CrossoverProbs,
    Quantizer,
    crossover_probs,
    interval_probs,
    output_distribution,
    transition_matrix,
)
from .design import (
    Criterion,
    DesignResult,
    OptimizerConfig,
    design_quantizer,
    design_capacity_max,
    design_cutoff_max,
    design_lloyd_max,
    design_multibit,
    design_ppv_min,
)
from .simulate import McConfig, McReport, estimate_matrix, export_samples

__version__ = "0.1.0"

"""esngrid: deep and wide echo state networks on reservoir grids.

Builds grid-topology leaky reservoir networks, trains their linear readouts
by ridge regression, adapts neuron gains/biases with intrinsic plasticity,
searches hyperparameters with particle swarms, and measures dynamics through
separation analysis and local Lyapunov exponents. A config-driven harness
reproduces chaotic-series, temperature, and polyphonic-music forecasting
benchmarks at desk scale.
"""

from .reservoir import (
    HyperParameters,
    IpConfig,
    ReservoirWeights,
    TopologyGrid,
    init_weights,
    layer_step,
    run_network,
    scale_spectral_radius,
)
from .plasticity import ip_pretrain, ip_update, kl_estimate
from .readout import (
    ReadoutWeights,
    StateMatrix,
    beta_sweep,
    harvest_states,
    predict,
    ridge_explicit,
    ridge_svd,
)
from .metrics import MetricReport, find_threshold, fl_acc, mape, nrmse, pearson, rmse
from .diagnostics import (
    SeparationFit,
    SeparationPoint,
    classify_dynamics,
    local_mle,
    separation_fit,
    separation_points,
)
from .pso import Dimension, SearchSpace, Swarm, decode_position, init_swarm, optimize, swarm_step
from .data import (
    PianoRollDataset,
    SeriesDataset,
    load_csv_series,
    load_pianoroll,
    mackey_glass,
    make_forecast_dataset,
    moving_average,
    split_series,
    synthetic_daily_temps,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    StageError,
    emit_report,
    factor_pairs,
    neuronal_partitioning,
    param_sweep,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "HyperParameters",
    "IpConfig",
    "ReservoirWeights",
    "TopologyGrid",
    "init_weights",
    "layer_step",
    "run_network",
    "scale_spectral_radius",
    "ip_pretrain",
    "ip_update",
    "kl_estimate",
    "ReadoutWeights",
    "StateMatrix",
    "beta_sweep",
    "harvest_states",
    "predict",
    "ridge_explicit",
    "ridge_svd",
    "MetricReport",
    "find_threshold",
    "fl_acc",
    "mape",
    "nrmse",
    "pearson",
    "rmse",
    "SeparationFit",
    "SeparationPoint",
    "classify_dynamics",
    "local_mle",
    "separation_fit",
    "separation_points",
    "Dimension",
    "SearchSpace",
    "Swarm",
    "decode_position",
    "init_swarm",
    "optimize",
    "swarm_step",
    "PianoRollDataset",
    "SeriesDataset",
    "load_csv_series",
    "load_pianoroll",
    "mackey_glass",
    "make_forecast_dataset",
    "moving_average",
    "split_series",
    "synthetic_daily_temps",
    "ExperimentConfig",
    "ResultRecord",
    "StageError",
    "emit_report",
    "factor_pairs",
    "neuronal_partitioning",
    "param_sweep",
    "run_experiment",
]

"""Spiking-neuron reservoir computing for chaotic time-series prediction."""

from .encoding import EncodingConfig, build_schedule, discretize, fit_encoding
from .engine import (
    ContinuousSimConfig,
    FixedPointSimConfig,
    fixed_point_readout_counts,
    fixed_point_run,
    membrane_trace,
    simulate,
    spike_stats,
)
from .metalearn import AnnealConfig, anneal, evaluate_network, temperature
from .neurons import (
    ContinuousLifParams,
    FixedPointLifParams,
    step_continuous,
    step_fixed_point,
)
from .pipeline import SplitProtocol, TaskDefinition, run_task
from .readout import ReadoutModel, Score, nrmse, predict, train
from .timeseries import (
    HenonParams,
    MackeyGlassParams,
    gen_henon,
    gen_mackey_glass,
    split_series,
)
from .topology import (
    ReservoirNetwork,
    cluster_chains,
    erdos_renyi,
    handpicked_ring,
    linear_chains,
    load_network,
    remove_random_internal_edge,
    ring_small_world,
    save_network,
    wrap_with_input_layer,
)

__version__ = "0.1.0"

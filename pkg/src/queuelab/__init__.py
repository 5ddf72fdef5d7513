"""queuelab: a Monte-Carlo laboratory for hard open questions in
queueing: stationary tails, coupling, routing memory, moving servers,
polling fluid limits, and multi-access protocols.

Everything is driven by named reproducible random streams; every
estimator carries a confidence interval or an explicit verdict with
disclosed thresholds.
"""

from .channel import (
    ChannelRun,
    ErgodicityProbe,
    Feedback,
    Protocol,
    SlotState,
    additive_rule,
    ergodicity_probe,
    multiplicative_rule,
    run_protocol,
    slot_step,
    table_rule,
)
from .config import ConfigError, ExperimentConfig, parse_config
from .distributions import (
    DistributionSpec,
    det,
    empirical,
    exponential,
    integrated_tail,
    parse_distribution,
    pareto,
    uniform,
    weibull_tail,
)
from .gg1 import (
    Gg1Path,
    LoynesRecord,
    coupling_time,
    lindley_step,
    loynes_backward,
    simulate_forward,
    tv_bound_estimate,
)
from .inputs import (
    InputProcess,
    Intensity,
    iid_process,
    modulated_process,
    traffic_intensity,
)
from .multiserver import (
    StationaryWaitResult,
    TailAsymptoticsResult,
    estimate_stationary_wait,
    kw_path,
    kw_step,
    loynes_backward_vectors,
    moment_condition_check,
    tail_asymptotics_experiment,
)
from .polling import (
    FluidPath,
    PollingConfig,
    PollingRun,
    cycle_growth_estimate,
    fluid_trajectory,
    polling_simulate,
    recurrence_scan,
)
from .rng import RngStream
from .routing import (
    JsqProbeResult,
    PartialAccessResult,
    jsq_stationarity_probe,
    jsq_step,
    partial_access_experiment,
    partial_access_step,
)
from .runners import VERSION, run_experiment, verify_manifest
from .spatial import (
    AnnihilationConfig,
    CircleConfig,
    annihilation_simulate,
    circular_distance,
    greedy_server_simulate,
    nearest_particle,
    stability_scan,
)
from .stats import (
    EstimateWithCI,
    StabilityVerdict,
    batch_means_ci,
    drift_classify,
    ks_critical_value,
    ks_distance,
    regenerative_ci,
    tail_index_hill,
    wilson_interval,
)

__version__ = VERSION

__all__ = [
    "AnnihilationConfig",
    "ChannelRun",
    "CircleConfig",
    "ConfigError",
    "DistributionSpec",
    "ErgodicityProbe",
    "EstimateWithCI",
    "ExperimentConfig",
    "Feedback",
    "FluidPath",
    "Gg1Path",
    "InputProcess",
    "Intensity",
    "JsqProbeResult",
    "LoynesRecord",
    "PartialAccessResult",
    "PollingConfig",
    "PollingRun",
    "Protocol",
    "RngStream",
    "SlotState",
    "StabilityVerdict",
    "StationaryWaitResult",
    "TailAsymptoticsResult",
    "additive_rule",
    "annihilation_simulate",
    "batch_means_ci",
    "circular_distance",
    "coupling_time",
    "cycle_growth_estimate",
    "det",
    "drift_classify",
    "empirical",
    "ergodicity_probe",
    "estimate_stationary_wait",
    "exponential",
    "fluid_trajectory",
    "greedy_server_simulate",
    "iid_process",
    "integrated_tail",
    "jsq_stationarity_probe",
    "jsq_step",
    "ks_critical_value",
    "ks_distance",
    "kw_path",
    "kw_step",
    "lindley_step",
    "loynes_backward",
    "loynes_backward_vectors",
    "modulated_process",
    "moment_condition_check",
    "multiplicative_rule",
    "nearest_particle",
    "pareto",
    "parse_config",
    "parse_distribution",
    "partial_access_experiment",
    "partial_access_step",
    "polling_simulate",
    "recurrence_scan",
    "regenerative_ci",
    "run_experiment",
    "run_protocol",
    "simulate_forward",
    "slot_step",
    "stability_scan",
    "table_rule",
    "tail_asymptotics_experiment",
    "tail_index_hill",
    "traffic_intensity",
    "tv_bound_estimate",
    "uniform",
    "verify_manifest",
    "weibull_tail",
    "wilson_interval",
]

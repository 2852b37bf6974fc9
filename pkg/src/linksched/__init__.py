"""Distributed SINR link scheduling with approximated residual interference.

The package models a shared-channel wireless network in which every link
has complete state information only inside a neighborhood radius.  The
interference arriving from outside that radius is either ignored, replaced
by a deterministic mean-field value, or modeled as a normal random
variable; scheduling decisions are made by randomized message passing over
a per-link factor graph, and evaluated against the exact full-information
SINR.
"""

from linksched.network import (
    Network,
    NeighborhoodSystem,
    SchedulingParams,
    LinkPlacement,
    channel_gain,
    config_from_active,
    active_ids,
    inverse_sinr,
    inverse_sinr_all,
    inverse_sinr_local,
    inverse_sinr_local_all,
    residual_interference,
    potential_energy,
    objective_value,
    outage_probability,
    generate_topology,
    linear_network,
    neighborhood,
    params_for,
    save_network,
    load_network,
)
from linksched.oracle import (
    SeparationRule,
    SinrRule,
    enumerate_feasible,
    boltzmann_argmax,
    boltzmann_probabilities,
    mc_boltzmann_sample,
)
from linksched.meanfield import MfSolution, mf_solve, mf_from_measurement, variational_free_energy
from linksched.residual import (
    FrontierParams,
    ResidualMoments,
    frontier_mean_radius,
    moment_u,
    moment_v,
    residual_moments,
    lyapunov_ratio,
    lyapunov_profile,
    mc_residual_oracle,
)
from linksched.scheduler import (
    IgnoreResidual,
    MeanFieldResidual,
    NormalResidual,
    SchedulePolicy,
    ScheduleTrace,
    build_factor_graph,
    schedule,
    mode_from_string,
)
from linksched.harness import (
    TopologySpec,
    ExperimentSpec,
    OutageReport,
    run_experiment,
    convergence_study,
    write_results_csv,
    write_summary_csv,
    read_results_csv,
)

__version__ = "0.1.0"

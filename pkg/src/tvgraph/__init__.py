"""Latency analysis, simulation, and adaptive routing on time-varying graphs."""

from .analytics import (
    LatencyPmf,
    LocationPmf,
    er_cut_latency_pmf,
    er_soa_latency_pmf,
    er_soa_location_pmf,
    m_smashed_reach_cdf,
    mc_cut_latency_pmf,
    mc_smashed_reach_cdf,
    mc_soa_latency_pmf,
    pmf_moments,
    smashed_reach_cdf,
    stacked_reach_cdf,
)
from .models import (
    Configuration,
    ErParams,
    MarkovParams,
    ModelSpec,
    UnderlyingGraph,
    alternating_average_latency,
    alternating_cut_latency,
    alternating_soa_latency,
    alternating_tgs,
    config_stats,
    format_model_spec,
    parse_model_spec,
    sample_er_tgs,
    sample_markov_tgs,
    stationary_distribution,
)
from .routing import (
    MettTable,
    adaptive_next_hop,
    compute_mett,
    cut_mett_small,
    mett_value_iteration_oracle,
    prefix_cost,
    run_adaptive_route,
)
from .simulate import (
    EmpiricalPmf,
    TrialResult,
    empirical_reachable_pairs,
    reachable_pairs_samples,
    replay_cut,
    replay_soa,
    simulate_cut,
    simulate_soa,
)
from .temporal import (
    Graphlet,
    GraphletSequence,
    SmashedGraph,
    StackedGraph,
    build_stacked,
    dump_tgs,
    format_tgs,
    load_tgs,
    m_smash,
    parse_tgs,
    reachable_pairs_fraction,
    smash,
    stacked_reachable,
    t_adjacent,
    t_clique,
    t_k_connected,
    t_reachable,
)

__version__ = "0.1.0"

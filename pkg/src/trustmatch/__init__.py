"""Trusted task-resource matching for heterogeneous device fleets.

The pipeline: physical cost/value models, an interaction-driven per-type
trust model, 3-uniform offer/demand hypergraphs, and an evolutionary-game
matcher with brute-force and heuristic baselines, wrapped in a seeded
experiment harness and CLI.
"""

from .hypergraph import (
    IncidenceMatrix,
    ResourceHyperedge,
    ResourceHypergraph,
    TaskHyperedge,
    TaskHypergraph,
    build_resource_hypergraph,
    build_task_hypergraph,
    candidate_resource_edges,
    incidence_matrix,
)
from .matching import (
    MatchContext,
    MatchResult,
    MatchingError,
    NoFeasibleStrategiesError,
    SearchSpaceError,
    Strategy,
    StrategySet,
    brute_force_matching,
    build_context,
    check_feasibility,
    generate_strategies,
    nearest_neighbor_matching,
    one_to_one_trust_matching,
    random_matching,
    replicator_step,
    solve_matching,
    triple_payoff,
)
from .model import (
    BITS_PER_MB,
    DeviceSpec,
    ScenarioConfig,
    ScenarioError,
    Subtask,
    Task,
    TaskType,
    TrustWeights,
    ValueWeights,
    Violation,
    benchmark_task,
    builtin_ics_catalog,
    bundled_scenario_path,
    dump_scenario,
    load_scenario,
    one_to_one_weights,
    validate_scenario,
)
from .physics import (
    CompletionRecord,
    collaboration_cost,
    completion_value,
    energy_value,
    expected_self_energy,
    time_value,
    transmission_rate,
)
from .rng import SplitMix64
from .trust import (
    DirectedTrustGraph,
    GroupTrustHypergraph,
    InteractionRecord,
    TrustLedger,
    bootstrap_trust,
    build_group_trust_hypergraph,
    decompose_to_directed,
    pairwise_trust,
    record_outcome,
    task_specific_trust,
)

__version__ = "0.1.0"

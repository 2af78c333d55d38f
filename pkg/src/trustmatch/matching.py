"""Task-resource matching as an evolutionary clustering game.

Each candidate pairing of a demand hyperedge with an admissible offer
hyperedge is a pure strategy, scored by the value of completion.  A
population over strategies evolves under a multiplicative payoff update;
triples of mutually consistent strategies (pairwise-distinct subtasks and
pairwise-distinct collaborators) earn their mean score, inconsistent
triples earn nothing.  The surviving cluster is reduced to a one-to-one
assignment.  Brute-force search and simple baselines provide reference
points; every solver emits the same MatchResult shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hypergraph import (
    ResourceHyperedge,
    ResourceHypergraph,
    TaskHyperedge,
    TaskHypergraph,
    build_resource_hypergraph,
    build_task_hypergraph,
    candidate_resource_edges,
)
from .model import (
    ScenarioConfig,
    Task,
    TrustWeights,
    Violation,
    distance,
    one_to_one_weights,
)
from .physics import ValueBreakdown, completion_value, transmission_rate
from .rng import SplitMix64
from .trust import (
    DirectedTrustGraph,
    TrustLedger,
    build_group_trust_hypergraph,
    decompose_to_directed,
    task_specific_trust,
)


class MatchingError(Exception):
    pass


class NoFeasibleStrategiesError(MatchingError):
    """No subtask has any admissible collaborator."""


class SearchSpaceError(MatchingError):
    """Instance exceeds the exhaustive-search bounds."""


@dataclass(frozen=True)
class Strategy:
    """One candidate match of a demand hyperedge with an offer hyperedge."""

    task_edge: TaskHyperedge
    resource_edge: ResourceHyperedge
    score: float
    breakdown: ValueBreakdown

    @property
    def subtask_index(self) -> int:
        return self.task_edge.subtask_index

    @property
    def collaborator(self) -> int:
        return self.resource_edge.collaborator


class StrategySet:
    """Indexed strategies with the label arrays the payoff model needs."""

    def __init__(self, strategies: list[Strategy]):
        self.strategies = list(strategies)
        self.task_index = np.array([s.subtask_index for s in strategies], dtype=np.intp)
        collabs = sorted({s.collaborator for s in strategies})
        self._dev_of = {d: i for i, d in enumerate(collabs)}
        self.device_index = np.array([self._dev_of[s.collaborator] for s in strategies],
                                     dtype=np.intp)
        self.scores = np.array([s.score for s in strategies], dtype=float)
        self._has_triple: bool | None = None

    def __len__(self) -> int:
        return len(self.strategies)

    def __getitem__(self, n: int) -> Strategy:
        return self.strategies[n]

    def consistent(self, n1: int, n2: int, n3: int) -> bool:
        t = (self.task_index[n1], self.task_index[n2], self.task_index[n3])
        d = (self.device_index[n1], self.device_index[n2], self.device_index[n3])
        return len(set(t)) == 3 and len(set(d)) == 3

    def has_consistent_triple(self) -> bool:
        """True iff some triple of strategies is mutually consistent.

        Equivalent to the subtask-device bipartite graph of strategies
        containing a matching of size 3, found by augmenting paths.
        Cached: the set is immutable once built.
        """
        if self._has_triple is not None:
            return self._has_triple
        adj: dict[int, set[int]] = {}
        for t, d in zip(self.task_index, self.device_index):
            adj.setdefault(int(t), set()).add(int(d))
        if len(adj) < 3:
            self._has_triple = False
            return False
        matched: dict[int, int] = {}  # device -> subtask

        def assign(t: int, visited: set[int]) -> bool:
            for d in sorted(adj[t]):
                if d in visited:
                    continue
                visited.add(d)
                if d not in matched or assign(matched[d], visited):
                    matched[d] = t
                    return True
            return False

        size = 0
        for t in sorted(adj):
            if assign(t, set()):
                size += 1
                if size >= 3:
                    self._has_triple = True
                    return True
        self._has_triple = False
        return False


def triple_payoff(n1: int, n2: int, n3: int, strategies: StrategySet) -> float:
    """Mean score of a mutually consistent strategy triple, else zero."""
    if not strategies.consistent(n1, n2, n3):
        return 0.0
    s = strategies.scores
    return float(s[n1] + s[n2] + s[n3]) / 3.0


def payoff_tensor(strategies: StrategySet) -> np.ndarray:
    """Dense N^3 payoff tensor; reference path, only viable for small N."""
    tau = strategies.task_index
    dev = strategies.device_index
    s = strategies.scores
    compat = (tau[:, None] != tau[None, :]) & (dev[:, None] != dev[None, :])
    cons = compat[:, :, None] & compat[:, None, :] & compat[None, :, :]
    means = (s[:, None, None] + s[None, :, None] + s[None, None, :]) / 3.0
    return np.where(cons, means, 0.0)


def _masked_pair_sum(x: np.ndarray, y: np.ndarray, tau: np.ndarray,
                     dev: np.ndarray, ntau: int, ndev: int) -> np.ndarray:
    """For every strategy n, the sum of x_b * y_c over all pairwise-compatible
    (b, c) that are each compatible with n.

    Compatibility excludes equal subtasks and equal collaborators.  Because
    each strategy's (subtask, collaborator) pair is unique, the exclusions
    decompose into group sums over subtask labels and collaborator labels,
    making the whole computation linear in the number of strategies.
    """
    xy = x * y
    sx, sy, sxy = x.sum(), y.sum(), xy.sum()
    tx = np.bincount(tau, weights=x, minlength=ntau)
    ty = np.bincount(tau, weights=y, minlength=ntau)
    txy = np.bincount(tau, weights=xy, minlength=ntau)
    dx = np.bincount(dev, weights=x, minlength=ndev)
    dy = np.bincount(dev, weights=y, minlength=ndev)
    dxy = np.bincount(dev, weights=xy, minlength=ndev)
    qt = float(tx @ ty)
    qd = float(dx @ dy)
    # cross terms: per-collaborator sums of subtask-group masses and vice versa
    wd_xy = np.bincount(dev, weights=tx[tau] * y, minlength=ndev)
    wd_yx = np.bincount(dev, weights=ty[tau] * x, minlength=ndev)
    wt_xy = np.bincount(tau, weights=dx[dev] * y, minlength=ntau)
    wt_yx = np.bincount(tau, weights=dy[dev] * x, minlength=ntau)

    ax = sx - tx[tau] - dx[dev] + x
    ay = sy - ty[tau] - dy[dev] + y
    elem = sxy - txy[tau] - dxy[dev] + xy
    # sum over subtask groups of masked group-mass products
    p = (qt - tx[tau] * ty[tau]
         - (wd_xy[dev] - tx[tau] * y) - (wd_yx[dev] - ty[tau] * x)
         + (dxy[dev] - xy))
    # sum over collaborator groups, symmetric roles
    r = (qd - dx[dev] * dy[dev]
         - (wt_xy[tau] - dx[dev] * y) - (wt_yx[tau] - dy[dev] * x)
         + (txy[tau] - xy))
    return ax * ay - p - r + elem


def expected_payoffs(q: np.ndarray, strategies: StrategySet
                     ) -> tuple[np.ndarray, float]:
    """Per-strategy expected payoff against two population draws, plus the
    population-wide expected payoff."""
    tau = strategies.task_index
    dev = strategies.device_index
    s = strategies.scores
    ntau = int(tau.max()) + 1 if len(tau) else 0
    ndev = int(dev.max()) + 1 if len(dev) else 0
    g_qq = _masked_pair_sum(q, q, tau, dev, ntau, ndev)
    g_sq = _masked_pair_sum(s * q, q, tau, dev, ntau, ndev)
    f = (s * g_qq + 2.0 * g_sq) / 3.0
    return f, float(q @ f)


def expected_payoffs_dense(q: np.ndarray, pi: np.ndarray
                           ) -> tuple[np.ndarray, float]:
    """Reference evaluation straight from a dense payoff tensor."""
    f = np.einsum("abc,b,c->a", pi, q, q)
    return f, float(q @ f)


def replicator_step(q: np.ndarray, payoff: StrategySet | np.ndarray
                    ) -> tuple[np.ndarray, bool]:
    """One multiplicative update.  Returns (next state, stagnated).

    Stagnation (zero population payoff) leaves the state untouched; it only
    arises when no consistent triple has support.
    """
    if isinstance(payoff, StrategySet):
        # an all-zero payoff is detected structurally: the aggregate path
        # computes exact zeros with cancellation noise around 1e-16
        if not payoff.has_consistent_triple():
            return q.copy(), True
        f, u = expected_payoffs(q, payoff)
    else:
        f, u = expected_payoffs_dense(q, payoff)
    if u <= 0.0:
        return q.copy(), True
    w = np.maximum(q * f, 0.0)
    total = w.sum()
    if total <= 0.0:
        return q.copy(), True
    return w / total, False


# ---------------------------------------------------------------------------
# Match context and results
# ---------------------------------------------------------------------------

@dataclass
class MatchContext:
    """Everything a solver needs: scenario, ledger, trust graph, offers."""

    scenario: ScenarioConfig
    ledger: TrustLedger
    weights: TrustWeights
    graph: DirectedTrustGraph
    resource_h: ResourceHypergraph


def build_context(scenario: ScenarioConfig, ledger: TrustLedger,
                  weights: TrustWeights | None = None) -> MatchContext:
    """Run the trust pipeline end to end and index the offer hypergraph."""
    weights = weights or scenario.trust_weights
    group_h = build_group_trust_hypergraph(scenario, ledger, weights)
    graph = decompose_to_directed(group_h, ledger, scenario, weights)
    res_h = build_resource_hypergraph(graph, ledger, scenario, weights)
    return MatchContext(scenario, ledger, weights, graph, res_h)


@dataclass(frozen=True)
class SubtaskReport:
    subtask_index: int
    collaborator: int | None
    value: float
    time_value: float | None = None
    energy_value: float | None = None
    t_total_s: float | None = None
    e_total_j: float | None = None

    def to_dict(self) -> dict:
        return {"subtask": self.subtask_index, "collaborator": self.collaborator,
                "value": self.value, "time_value": self.time_value,
                "energy_value": self.energy_value, "t_total_s": self.t_total_s,
                "e_total_j": self.e_total_j}


@dataclass
class Diagnostics:
    solver: str
    strategy_count: int = 0
    iterations: int = 0
    residual: float = 0.0
    survivors: dict[int, float] = field(default_factory=dict)
    degenerate: bool = False
    stagnated: bool = False

    def to_dict(self) -> dict:
        return {"solver": self.solver, "strategy_count": self.strategy_count,
                "iterations": self.iterations, "residual": self.residual,
                "survivors": {str(k): v for k, v in self.survivors.items()},
                "degenerate": self.degenerate, "stagnated": self.stagnated}


@dataclass
class MatchResult:
    assignment: dict[int, int]  # subtask index -> collaborator device id
    per_subtask: list[SubtaskReport]
    average_value: float
    unassigned: list[int]
    diagnostics: Diagnostics

    def to_dict(self) -> dict:
        return {"assignment": {str(k): v for k, v in sorted(self.assignment.items())},
                "per_subtask": [r.to_dict() for r in self.per_subtask],
                "average_value": self.average_value,
                "unassigned": list(self.unassigned),
                "diagnostics": self.diagnostics.to_dict()}


def average_value(values: list[float | None], n_subtasks: int) -> float:
    """Mean value over all subtasks; unassigned ones contribute zero."""
    if n_subtasks <= 0:
        raise ValueError("need at least one subtask")
    return sum(v for v in values if v is not None) / n_subtasks


def _result_from_choices(task: Task, choices: dict[int, tuple[int, ValueBreakdown]],
                         diag: Diagnostics) -> MatchResult:
    reports = []
    values: list[float | None] = []
    assignment: dict[int, int] = {}
    unassigned: list[int] = []
    for m in range(len(task.subtasks)):
        if m in choices:
            dev, br = choices[m]
            assignment[m] = dev
            reports.append(SubtaskReport(m, dev, br.value, br.time_value,
                                         br.energy_value, br.record.t_total_s,
                                         br.record.e_total_j))
            values.append(br.value)
        else:
            unassigned.append(m)
            reports.append(SubtaskReport(m, None, 0.0))
            values.append(None)
    return MatchResult(
        assignment=assignment,
        per_subtask=reports,
        average_value=average_value(values, len(task.subtasks)),
        unassigned=unassigned,
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# Strategy generation
# ---------------------------------------------------------------------------

def generate_strategies(task_h: TaskHypergraph, res_h: ResourceHypergraph,
                        ctx: MatchContext) -> StrategySet:
    """Admit every offer matching a demand's initiator and type whose trust
    weight covers the demand and whose link rate covers the rate demand.
    Scores are the value of completion for the candidate hand-off."""
    scenario = ctx.scenario
    initiator = scenario.device(task_h.task.initiator)
    strategies: list[Strategy] = []
    for te in task_h.hyperedges:
        b = task_h.task.subtasks[te.subtask_index]
        density = scenario.task_type(b.task_type).processing_density
        for re in candidate_resource_edges(res_h, te.initiator, te.task_type):
            if re.weight < te.weight:
                continue
            collaborator = scenario.device(re.collaborator)
            if transmission_rate(initiator, collaborator, scenario.channel) < b.min_rate_bps:
                continue
            br = completion_value(b, initiator, collaborator, scenario.channel,
                                  scenario.value_weights, density)
            strategies.append(Strategy(te, re, br.value, br))
    return StrategySet(strategies)


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def _greedy_resolution(order: list[int], strategies: StrategySet
                       ) -> dict[int, tuple[int, ValueBreakdown]]:
    """Keep strategies in the given priority order subject to one match per
    subtask and per collaborator."""
    chosen: dict[int, tuple[int, ValueBreakdown]] = {}
    used_devices: set[int] = set()
    for n in order:
        st = strategies[n]
        if st.subtask_index in chosen or st.collaborator in used_devices:
            continue
        chosen[st.subtask_index] = (st.collaborator, st.breakdown)
        used_devices.add(st.collaborator)
    return chosen


def solve_matching(task: Task, ctx: MatchContext,
                   solver_name: str = "ttr") -> MatchResult:
    """Evolutionary-game matching with a one-to-one resolution step.

    The population starts at the barycenter and follows the multiplicative
    update until the change drops below the configured threshold or the
    iteration budget runs out.  Strategies whose final share exceeds the
    survival threshold form the match cluster; conflicts resolve in favor
    of the higher share (ties to the lower strategy index).  Games with no
    consistent triple fall back to greedy assignment by score.
    """
    task_h = build_task_hypergraph(task)
    strategies = generate_strategies(task_h, ctx.resource_h, ctx)
    n = len(strategies)
    diag = Diagnostics(solver=solver_name, strategy_count=n)
    if n == 0:
        raise NoFeasibleStrategiesError(
            "no feasible collaborator for any subtask")

    if not strategies.has_consistent_triple():
        # No triple can ever earn payoff (fewer than three mutually
        # compatible strategies), so the game is vacuous: assign greedily
        # by score under the one-to-one constraints.
        diag.degenerate = True
        order = sorted(range(n), key=lambda i: (-strategies.scores[i], i))
        choices = _greedy_resolution(order, strategies)
        return _result_from_choices(task, choices, diag)

    params = ctx.scenario.replicator
    q = np.full(n, 1.0 / n)
    residual = float("inf")
    for it in range(params.max_iters):
        q_next, stagnated = replicator_step(q, strategies)
        if stagnated:
            diag.stagnated = True
            diag.iterations = it
            break
        residual = float(np.abs(q_next - q).sum())
        q = q_next
        diag.iterations = it + 1
        if residual < params.convergence_eps:
            break
    diag.residual = residual if residual != float("inf") else 0.0

    threshold = params.ess_threshold if params.ess_threshold is not None else 1.0 / (2 * n)
    survivors = [i for i in range(n) if q[i] > threshold]
    diag.survivors = {i: float(q[i]) for i in survivors}
    order = sorted(survivors, key=lambda i: (-q[i], i))
    choices = _greedy_resolution(order, strategies)
    return _result_from_choices(task, choices, diag)


def _feasible_collaborators(task: Task, m: int, ctx: MatchContext) -> list[int]:
    """Device ids admissible for subtask m, checked straight from the trust
    graph and channel (independent of the offer hypergraph indexing).

    Task-specific trust is only defined between devices that both support
    the type, so a type outside the initiator's own set has no admissible
    collaborator under any solver.
    """
    b = task.subtasks[m]
    scenario = ctx.scenario
    initiator = scenario.device(task.initiator)
    if not initiator.supports(b.task_type):
        return []
    out = []
    for dev in scenario.devices:
        if dev.id == task.initiator or not dev.supports(b.task_type):
            continue
        if (task.initiator, dev.id) not in ctx.graph.edges:
            continue
        trust = task_specific_trust(ctx.graph, ctx.ledger, task.initiator,
                                    dev.id, b.task_type, ctx.weights)
        if trust < b.min_trust:
            continue
        if transmission_rate(initiator, dev, scenario.channel) < b.min_rate_bps:
            continue
        out.append(dev.id)
    return out


def _breakdown_for(task: Task, m: int, device_id: int, ctx: MatchContext) -> ValueBreakdown:
    b = task.subtasks[m]
    scenario = ctx.scenario
    return completion_value(b, scenario.device(task.initiator),
                            scenario.device(device_id), scenario.channel,
                            scenario.value_weights,
                            scenario.task_type(b.task_type).processing_density)


ORACLE_MAX_SUBTASKS = 5
ORACLE_MAX_DEVICES = 12


def brute_force_matching(task: Task, ctx: MatchContext,
                         max_subtasks: int = ORACLE_MAX_SUBTASKS,
                         max_devices: int = ORACLE_MAX_DEVICES) -> MatchResult:
    """Exhaustive search over injective subtask-to-device maps.

    Enumerates every feasible (possibly partial) assignment and returns the
    maximum average value; ties break toward the lexicographically smallest
    assignment, with lower device ids first and "unassigned" last.
    """
    m_count = len(task.subtasks)
    if m_count > max_subtasks or len(ctx.scenario.devices) > max_devices:
        raise SearchSpaceError(
            f"instance ({m_count} subtasks, {len(ctx.scenario.devices)} devices) "
            f"exceeds the exhaustive-search bound "
            f"({max_subtasks} subtasks, {max_devices} devices)")

    candidates = [sorted(_feasible_collaborators(task, m, ctx))
                  for m in range(m_count)]
    breakdowns = [{d: _breakdown_for(task, m, d, ctx) for d in candidates[m]}
                  for m in range(m_count)]

    best_total = -1.0
    best: dict[int, int] = {}
    current: dict[int, int] = {}
    used: set[int] = set()

    def descend(m: int, total: float) -> None:
        nonlocal best_total, best
        if m == m_count:
            if total > best_total:
                best_total = total
                best = dict(current)
            return
        for d in candidates[m]:
            if d in used:
                continue
            used.add(d)
            current[m] = d
            descend(m + 1, total + breakdowns[m][d].value)
            del current[m]
            used.discard(d)
        descend(m + 1, total)  # leave m unassigned; ordered last for ties

    descend(0, 0.0)
    choices = {m: (d, breakdowns[m][d]) for m, d in best.items()}
    diag = Diagnostics(solver="oracle",
                       strategy_count=sum(len(c) for c in candidates))
    return _result_from_choices(task, choices, diag)


def random_matching(task: Task, ctx: MatchContext, rng: SplitMix64) -> MatchResult:
    """Uniform pick per subtask from its feasible, still-unused candidates.

    Implemented as "first feasible device in a random permutation", which
    is exactly uniform over the candidate set and keeps the draw stable
    when a sweep merely shrinks the feasible pool.
    """
    choices: dict[int, tuple[int, ValueBreakdown]] = {}
    used: set[int] = set()
    all_ids = ctx.scenario.device_ids()
    for m in range(len(task.subtasks)):
        order = list(all_ids)
        rng.shuffle(order)
        cands = set(_feasible_collaborators(task, m, ctx)) - used
        d = next((j for j in order if j in cands), None)
        if d is None:
            continue
        used.add(d)
        choices[m] = (d, _breakdown_for(task, m, d, ctx))
    return _result_from_choices(task, choices, Diagnostics(solver="random"))


def nearest_neighbor_matching(task: Task, ctx: MatchContext) -> MatchResult:
    """Closest feasible unused collaborator per subtask, ties to lower id."""
    initiator = ctx.scenario.device(task.initiator)
    choices: dict[int, tuple[int, ValueBreakdown]] = {}
    used: set[int] = set()
    for m in range(len(task.subtasks)):
        cands = [d for d in _feasible_collaborators(task, m, ctx) if d not in used]
        if not cands:
            continue
        d = min(cands, key=lambda j: (distance(initiator, ctx.scenario.device(j)), j))
        used.add(d)
        choices[m] = (d, _breakdown_for(task, m, d, ctx))
    return _result_from_choices(task, choices, Diagnostics(solver="nn"))


def one_to_one_trust_matching(task: Task, scenario: ScenarioConfig,
                              ledger: TrustLedger) -> MatchResult:
    """Same game pipeline, but admission uses the collapsed single-value
    trust instead of the per-type trust."""
    ctx = build_context(scenario, ledger, one_to_one_weights(scenario.trust_weights))
    return solve_matching(task, ctx, solver_name="one_to_one")


# ---------------------------------------------------------------------------
# Feasibility audit
# ---------------------------------------------------------------------------

def check_feasibility(assignment: dict[int, int], task: Task, ctx: MatchContext,
                      require_complete: bool = False) -> list[Violation]:
    """Audit an assignment against the matching constraints: coverage
    (optional), device-side uniqueness, type support, trust demand, and
    rate demand.  Returns violations as data."""
    out: list[Violation] = []
    scenario = ctx.scenario
    initiator = scenario.device(task.initiator)
    seen_devices: dict[int, int] = {}
    for m in range(len(task.subtasks)):
        path = f"subtasks[{m}]"
        if m not in assignment:
            if require_complete:
                out.append(Violation("unassigned", path, "no collaborator assigned"))
            continue
        d_id = assignment[m]
        b = task.subtasks[m]
        if d_id in seen_devices:
            out.append(Violation("device-reused", path,
                                 f"device {d_id} already handles subtask {seen_devices[d_id]}"))
        seen_devices.setdefault(d_id, m)
        try:
            dev = scenario.device(d_id)
        except KeyError:
            out.append(Violation("unknown-device", path, f"device {d_id} not in fleet"))
            continue
        if not dev.supports(b.task_type):
            out.append(Violation("type-support", path,
                                 f"device {d_id} does not support type {b.task_type}"))
            continue
        if not initiator.supports(b.task_type):
            out.append(Violation("trust-undefined", path,
                                 f"initiator does not support type {b.task_type}, "
                                 "so no task-specific trust exists"))
            continue
        if (task.initiator, d_id) not in ctx.graph.edges:
            out.append(Violation("no-trust-edge", path,
                                 f"no trust edge {task.initiator} -> {d_id}"))
            continue
        trust = task_specific_trust(ctx.graph, ctx.ledger, task.initiator, d_id,
                                    b.task_type, ctx.weights)
        if trust < b.min_trust:
            out.append(Violation("trust-demand", path,
                                 f"trust {trust:.4f} below demand {b.min_trust}"))
        if transmission_rate(initiator, dev, scenario.channel) < b.min_rate_bps:
            out.append(Violation("rate-demand", path,
                                 f"link rate below demand {b.min_rate_bps}"))
    return out

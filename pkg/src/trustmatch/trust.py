"""Interaction ledger and the staged trust pipeline.

Trust between an initiator and a collaborator is assembled in stages:

1. a peer rating combining type overlap, shared-collaborator proximity,
   and historical success rate;
2. a per-cluster group trust hypergraph, one hyperedge per device per
   supported type, weighted by the mean rating from its cluster peers;
3. a node-level decomposition into a weighted directed graph mixing the
   device's overall (cross-cluster) group trust with the direct rating;
4. a task-type-specific trust that adds the per-type success history on
   top of the directed edge weight.

All stages read the ledger at call time; nothing is cached between calls,
so recomputation always reflects the latest recorded interactions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .model import (
    BITS_PER_MB,
    DeviceSpec,
    ScenarioConfig,
    Subtask,
    TrustWeights,
)
from .rng import SplitMix64


@dataclass(frozen=True)
class InteractionRecord:
    initiator: int
    collaborator: int
    task_type: int
    b_tra: int  # transmission succeeded
    b_exe: int  # execution succeeded (0 whenever transmission failed)
    b_ret: int  # overall result, b_tra * b_exe

    def to_dict(self) -> dict:
        return {"initiator": self.initiator, "collaborator": self.collaborator,
                "task_type": self.task_type, "b_tra": self.b_tra,
                "b_exe": self.b_exe, "b_ret": self.b_ret}


class TrustLedger:
    """Append-only record of interaction outcomes with O(1) count lookups."""

    def __init__(self) -> None:
        self._records: list[InteractionRecord] = []
        self._pair: dict[tuple[int, int], list[int]] = {}
        self._pair_type: dict[tuple[int, int, int], list[int]] = {}

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> tuple[InteractionRecord, ...]:
        return tuple(self._records)

    def append(self, rec: InteractionRecord) -> None:
        if rec.b_ret != rec.b_tra * rec.b_exe:
            raise ValueError("inconsistent outcome: b_ret must equal b_tra * b_exe")
        self._records.append(rec)
        pair = self._pair.setdefault((rec.initiator, rec.collaborator), [0, 0])
        pair[0] += rec.b_ret
        pair[1] += 1
        triple = self._pair_type.setdefault(
            (rec.initiator, rec.collaborator, rec.task_type), [0, 0])
        triple[0] += rec.b_ret
        triple[1] += 1

    def counts(self, initiator: int, collaborator: int) -> tuple[int, int]:
        """(successes, total) over all task types."""
        succ, total = self._pair.get((initiator, collaborator), (0, 0))
        return succ, total

    def counts_for_type(self, initiator: int, collaborator: int,
                        task_type: int) -> tuple[int, int]:
        succ, total = self._pair_type.get((initiator, collaborator, task_type), (0, 0))
        return succ, total

    def success_rate(self, initiator: int, collaborator: int, neutral: float) -> float:
        succ, total = self.counts(initiator, collaborator)
        return succ / total if total else neutral

    def success_rate_for_type(self, initiator: int, collaborator: int,
                              task_type: int, neutral: float) -> float:
        succ, total = self.counts_for_type(initiator, collaborator, task_type)
        return succ / total if total else neutral

    # -- persistence (JSON lines, one record each) --------------------------

    def save_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self._records:
                fh.write(json.dumps(rec.to_dict()) + "\n")

    @classmethod
    def load_jsonl(cls, path: str | Path) -> "TrustLedger":
        ledger = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                d = json.loads(line)
                ledger.append(InteractionRecord(
                    int(d["initiator"]), int(d["collaborator"]), int(d["task_type"]),
                    int(d["b_tra"]), int(d["b_exe"]), int(d["b_ret"])))
        return ledger


# ---------------------------------------------------------------------------
# Peer rating
# ---------------------------------------------------------------------------

def clusters_by_type(scenario: ScenarioConfig) -> dict[int, tuple[int, ...]]:
    """Device ids grouped by supported task type, ids ascending."""
    return {
        t.id: tuple(sorted(d.id for d in scenario.devices if d.supports(t.id)))
        for t in scenario.task_types
    }


def potential_collaborators(scenario: ScenarioConfig) -> dict[int, frozenset[int]]:
    """For each device, the union of its clusters minus the device itself."""
    clusters = clusters_by_type(scenario)
    out: dict[int, frozenset[int]] = {}
    for d in scenario.devices:
        peers: set[int] = set()
        for s in d.supported_types:
            peers.update(clusters.get(s, ()))
        peers.discard(d.id)
        out[d.id] = frozenset(peers)
    return out


def _jaccard(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def _rating(dev_i: DeviceSpec, dev_j: DeviceSpec, g_i: frozenset, g_j: frozenset,
            ledger: TrustLedger, weights: TrustWeights) -> float:
    d1, d2, d3 = weights.delta
    return (d1 * _jaccard(dev_i.supported_types, dev_j.supported_types)
            + d2 * _jaccard(g_i, g_j)
            + d3 * ledger.success_rate(dev_i.id, dev_j.id, weights.neutral_prior))


def pairwise_trust(ledger: TrustLedger, a_i: int, a_j: int,
                   scenario: ScenarioConfig,
                   weights: TrustWeights | None = None) -> float:
    """Rating of collaborator a_j by device a_i: a convex mix of task-type
    overlap, shared potential collaborators, and historical success rate."""
    if a_i == a_j:
        raise ValueError("a device does not rate itself")
    weights = weights or scenario.trust_weights
    collab = potential_collaborators(scenario)
    return _rating(scenario.device(a_i), scenario.device(a_j),
                   collab[a_i], collab[a_j], ledger, weights)


# ---------------------------------------------------------------------------
# Group trust hypergraph and its decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupHyperedge:
    """One evaluation hyperedge: cluster members collectively rate the center."""

    center: int
    task_type: int
    members: tuple[int, ...]
    weight: float


@dataclass(frozen=True)
class GroupTrustHypergraph:
    clusters: dict[int, tuple[int, ...]]
    hyperedges: tuple[GroupHyperedge, ...]

    def weights_for(self, device_id: int) -> list[float]:
        return [e.weight for e in self.hyperedges if e.center == device_id]


def build_group_trust_hypergraph(scenario: ScenarioConfig, ledger: TrustLedger,
                                 weights: TrustWeights | None = None
                                 ) -> GroupTrustHypergraph:
    """One hyperedge per (cluster, member): the member is the center and the
    weight is the mean rating it receives from the other cluster members.
    Singleton clusters have no evaluators and fall back to the neutral prior.
    """
    weights = weights or scenario.trust_weights
    clusters = clusters_by_type(scenario)
    collab = potential_collaborators(scenario)
    by_id = {d.id: d for d in scenario.devices}

    cache: dict[tuple[int, int], float] = {}

    def rating(i: int, j: int) -> float:
        key = (i, j)
        if key not in cache:
            cache[key] = _rating(by_id[i], by_id[j], collab[i], collab[j],
                                 ledger, weights)
        return cache[key]

    edges: list[GroupHyperedge] = []
    for s in sorted(clusters):
        members = clusters[s]
        for a_j in members:
            others = [a_i for a_i in members if a_i != a_j]
            if others:
                weight = sum(rating(a_i, a_j) for a_i in others) / len(others)
            else:
                weight = weights.neutral_prior
            edges.append(GroupHyperedge(a_j, s, members, weight))
    return GroupTrustHypergraph(clusters=clusters, hyperedges=tuple(edges))


@dataclass(frozen=True)
class DirectedTrustGraph:
    """Weighted directed trust edges between devices sharing a cluster."""

    edges: dict[tuple[int, int], float]
    overall: dict[int, float]  # center -> mean group trust across its clusters
    supported: dict[int, frozenset[int]]

    def weight(self, a_i: int, a_j: int) -> float:
        try:
            return self.edges[(a_i, a_j)]
        except KeyError:
            raise KeyError(f"no trust edge {a_i} -> {a_j}") from None


def decompose_to_directed(group_h: GroupTrustHypergraph, ledger: TrustLedger,
                          scenario: ScenarioConfig,
                          weights: TrustWeights | None = None) -> DirectedTrustGraph:
    """Convert evaluation hyperedges into directed edges i -> center whose
    weight mixes the center's overall group trust with the direct rating.
    Duplicate ordered pairs from multiple shared clusters collapse; the
    weight is identical by construction."""
    weights = weights or scenario.trust_weights
    b1, b2, _ = weights.beta
    collab = potential_collaborators(scenario)
    by_id = {d.id: d for d in scenario.devices}

    overall: dict[int, float] = {}
    per_center: dict[int, list[float]] = {}
    for e in group_h.hyperedges:
        per_center.setdefault(e.center, []).append(e.weight)
    for center, ws in per_center.items():
        overall[center] = sum(ws) / len(ws)

    edges: dict[tuple[int, int], float] = {}
    for e in group_h.hyperedges:
        for a_i in e.members:
            if a_i == e.center or (a_i, e.center) in edges:
                continue
            direct = _rating(by_id[a_i], by_id[e.center], collab[a_i],
                             collab[e.center], ledger, weights)
            edges[(a_i, e.center)] = b1 * overall[e.center] + b2 * direct
    return DirectedTrustGraph(
        edges=edges,
        overall=overall,
        supported={d.id: d.supported_types for d in scenario.devices},
    )


def task_specific_trust(graph: DirectedTrustGraph, ledger: TrustLedger,
                        a_i: int, a_j: int, task_type: int,
                        weights: TrustWeights) -> float:
    """Directed edge weight plus the weighted per-type success history."""
    for dev in (a_i, a_j):
        if task_type not in graph.supported.get(dev, frozenset()):
            raise ValueError(f"device {dev} does not support task type {task_type}")
    w = graph.weight(a_i, a_j)
    b3 = weights.beta[2]
    return w + b3 * ledger.success_rate_for_type(a_i, a_j, task_type,
                                                 weights.neutral_prior)


# ---------------------------------------------------------------------------
# Outcome simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OutcomeDraw:
    """Sampled randomness for a single hand-off: the instantaneous packet
    loss rate seen in transmission and the execution success draw."""

    eta_pkt: float
    exe_success: bool


def sample_packet_loss(mean_loss: float, rng: SplitMix64) -> float:
    """Per-transmission packet loss rate: exponential around the link mean,
    clipped to [0,1].  A zero-mean link never loses packets."""
    if mean_loss <= 0.0:
        return 0.0
    return min(1.0, -mean_loss * math.log(1.0 - rng.random()))


def sample_outcome(scenario: ScenarioConfig, a_i: int, a_j: int, task_type: int,
                   rng: SplitMix64) -> OutcomeDraw:
    eta = sample_packet_loss(scenario.link_loss.mean_loss(a_i, a_j), rng)
    reliability = scenario.device(a_j).reliability.get(task_type, 0.95)
    return OutcomeDraw(eta_pkt=eta, exe_success=rng.random() < reliability)


def record_outcome(ledger: TrustLedger, a_i: int, a_j: int, b: Subtask,
                   draw: OutcomeDraw, loss_threshold: float) -> InteractionRecord:
    """Apply the outcome rules and append the record.

    Transmission succeeds iff the sampled loss stays within the threshold;
    execution only counts when the payload arrived.
    """
    b_tra = 1 if draw.eta_pkt <= loss_threshold else 0
    b_exe = (1 if draw.exe_success else 0) if b_tra else 0
    rec = InteractionRecord(a_i, a_j, b.task_type, b_tra, b_exe, b_tra * b_exe)
    ledger.append(rec)
    return rec


# Parameter ranges for randomly generated warm-up subtasks.  Outcomes depend
# only on (pair, type), but realistic payloads keep the generated tasks
# usable as matching instances too.
BOOTSTRAP_SIZE_RANGE_MB = (1.0, 10.0)
BOOTSTRAP_DEADLINE_RANGE_S = (0.5, 2.0)
BOOTSTRAP_MIN_TRUST = 0.2
BOOTSTRAP_RATE_RANGE_MBPS = (1.0, 10.0)


def random_subtask(task_type: int, rng: SplitMix64) -> Subtask:
    return Subtask(
        task_type=task_type,
        size_bits=rng.uniform(*BOOTSTRAP_SIZE_RANGE_MB) * BITS_PER_MB,
        deadline_s=rng.uniform(*BOOTSTRAP_DEADLINE_RANGE_S),
        min_trust=BOOTSTRAP_MIN_TRUST,
        min_rate_bps=rng.uniform(*BOOTSTRAP_RATE_RANGE_MBPS) * BITS_PER_MB,
    )


def bootstrap_trust(scenario: ScenarioConfig, ledger: TrustLedger, n_tasks: int,
                    rng: SplitMix64, max_subtasks: int = 3,
                    fixed_initiator: int | None = None) -> TrustLedger:
    """Warm the ledger by executing random tasks with random assignments.

    Each generated subtask goes to a uniformly chosen supporter other than
    the initiator; task types no one else supports are skipped.  Initiators
    are drawn uniformly unless fixed_initiator pins one device (the
    single-operator regime, where that device's pairwise histories grow
    with every task).  Mutates and returns the given ledger.
    """
    ids = scenario.device_ids()
    supporters = {t.id: scenario.supporters(t.id) for t in scenario.task_types}
    for _ in range(n_tasks):
        if fixed_initiator is None:
            initiator = ids[rng.randrange(len(ids))]
        else:
            initiator = fixed_initiator
        usable_types = [s for s, sup in sorted(supporters.items())
                        if any(j != initiator for j in sup)]
        if not usable_types:
            continue
        for _ in range(rng.randint(1, max_subtasks)):
            s = usable_types[rng.randrange(len(usable_types))]
            candidates = [j for j in supporters[s] if j != initiator]
            collaborator = candidates[rng.randrange(len(candidates))]
            b = random_subtask(s, rng)
            draw = sample_outcome(scenario, initiator, collaborator, s, rng)
            record_outcome(ledger, initiator, collaborator, b, draw,
                           scenario.loss_threshold)
    return ledger

"""Directed 3-uniform hypergraphs linking devices, task types, and subtasks.

Two flavors exist.  The resource hypergraph offers one hyperedge per
(initiator, task type, collaborator) triple, weighted by task-specific
trust; it enumerates every collaboration the fleet could perform.  The
task hypergraph states one demand hyperedge per subtask, tying the
initiator and the subtask to a shared virtual terminal vertex, weighted
by the subtask's minimum trust demand.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import DeviceSpec, ScenarioConfig, Task, TaskType, TrustWeights
from .trust import DirectedTrustGraph, TrustLedger, task_specific_trust

#: label of the shared virtual terminal vertex in task hypergraphs
VIRTUAL_NODE = "phi"


@dataclass(frozen=True)
class ResourceHyperedge:
    """Offer: initiator trusts collaborator for one task type."""

    initiator: int
    task_type: int
    collaborator: int
    weight: float

    def vertices(self) -> tuple:
        return (("device", self.initiator), ("type", self.task_type),
                ("device", self.collaborator))


@dataclass(frozen=True)
class ResourceHypergraph:
    devices: tuple[DeviceSpec, ...]
    task_types: tuple[TaskType, ...]
    hyperedges: tuple[ResourceHyperedge, ...]

    def vertex_labels(self) -> list[tuple]:
        return ([("device", d.id) for d in self.devices]
                + [("type", t.id) for t in self.task_types])

    def edges_from(self, initiator: int, task_type: int) -> list[ResourceHyperedge]:
        return [e for e in self.hyperedges
                if e.initiator == initiator and e.task_type == task_type]


@dataclass(frozen=True)
class TaskHyperedge:
    """Demand: one subtask of the initiator, terminated at the virtual node."""

    initiator: int
    subtask_index: int
    task_type: int
    weight: float  # the subtask's minimum trust demand

    def vertices(self) -> tuple:
        return (("device", self.initiator), ("subtask", self.subtask_index),
                ("virtual", VIRTUAL_NODE))


@dataclass(frozen=True)
class TaskHypergraph:
    task: Task
    hyperedges: tuple[TaskHyperedge, ...]

    def vertex_labels(self) -> list[tuple]:
        return ([("device", self.task.initiator)]
                + [("subtask", m) for m in range(len(self.task.subtasks))]
                + [("virtual", VIRTUAL_NODE)])


def build_resource_hypergraph(graph: DirectedTrustGraph, ledger: TrustLedger,
                              scenario: ScenarioConfig,
                              weights: TrustWeights | None = None
                              ) -> ResourceHypergraph:
    """Expand each directed trust edge into one hyperedge per task type both
    endpoints support, weighted by the task-specific trust."""
    weights = weights or scenario.trust_weights
    edges: list[ResourceHyperedge] = []
    for (a_i, a_j) in sorted(graph.edges):
        shared = graph.supported[a_i] & graph.supported[a_j]
        for s in sorted(shared):
            w = task_specific_trust(graph, ledger, a_i, a_j, s, weights)
            edges.append(ResourceHyperedge(a_i, s, a_j, w))
    return ResourceHypergraph(devices=scenario.devices,
                              task_types=scenario.task_types,
                              hyperedges=tuple(edges))


def build_task_hypergraph(task: Task) -> TaskHypergraph:
    edges = tuple(
        TaskHyperedge(task.initiator, m, b.task_type, b.min_trust)
        for m, b in enumerate(task.subtasks)
    )
    return TaskHypergraph(task=task, hyperedges=edges)


def candidate_resource_edges(h: ResourceHypergraph, initiator: int,
                             task_type: int) -> list[ResourceHyperedge]:
    """All offers matching a demand's initiator and task type."""
    return h.edges_from(initiator, task_type)


@dataclass(frozen=True)
class IncidenceMatrix:
    matrix: np.ndarray  # 0/1, shape |V| x |E|
    vertices: list[tuple]
    edges: list[tuple]


def incidence_matrix(h: ResourceHypergraph | TaskHypergraph) -> IncidenceMatrix:
    """Dense vertex-by-hyperedge membership matrix; every column of a
    3-uniform hypergraph sums to 3."""
    vertices = h.vertex_labels()
    vindex = {v: i for i, v in enumerate(vertices)}
    mat = np.zeros((len(vertices), len(h.hyperedges)), dtype=np.int8)
    labels = []
    for col, e in enumerate(h.hyperedges):
        for v in e.vertices():
            mat[vindex[v], col] = 1
        labels.append(e.vertices())
    return IncidenceMatrix(matrix=mat, vertices=vertices, edges=labels)


# ---------------------------------------------------------------------------
# Inspection exports
# ---------------------------------------------------------------------------

def hypergraph_to_dict(h: ResourceHypergraph | TaskHypergraph) -> dict:
    if isinstance(h, ResourceHypergraph):
        return {
            "kind": "resource",
            "vertices": {
                "devices": [{"id": d.id, "cpu_hz": d.cpu_hz,
                             "position": list(d.position),
                             "tx_power_w": d.tx_power_w} for d in h.devices],
                "task_types": [{"id": t.id, "name": t.name} for t in h.task_types],
            },
            "hyperedges": [{"initiator": e.initiator, "task_type": e.task_type,
                            "collaborator": e.collaborator, "weight": e.weight}
                           for e in h.hyperedges],
        }
    return {
        "kind": "task",
        "vertices": {
            "initiator": h.task.initiator,
            "subtasks": [{"index": m, "task_type": b.task_type,
                          "size_bits": b.size_bits, "deadline_s": b.deadline_s,
                          "min_trust": b.min_trust, "min_rate_bps": b.min_rate_bps}
                         for m, b in enumerate(h.task.subtasks)],
            "virtual": VIRTUAL_NODE,
        },
        "hyperedges": [{"initiator": e.initiator, "subtask": e.subtask_index,
                        "task_type": e.task_type, "weight": e.weight}
                       for e in h.hyperedges],
    }


def incidence_to_csv(m: IncidenceMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex"] + [f"e{i}" for i in range(len(m.edges))])
        for label, row in zip(m.vertices, m.matrix):
            writer.writerow([f"{label[0]}:{label[1]}"] + [int(x) for x in row])

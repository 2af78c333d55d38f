"""Experiment harness: seeded scenario runs, parameter sweeps, and emission.

A replica is one (sweep value, seed) cell: it gets its own ledger and its
own PRNG stream derived from the replica seed, so replicas are independent
and may run in any order with identical results.  Wall-clock timings are
recorded per row but kept out of the CSV by default so that repeated runs
of the same spec produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .matching import (
    MatchContext,
    MatchResult,
    MatchingError,
    brute_force_matching,
    build_context,
    nearest_neighbor_matching,
    one_to_one_trust_matching,
    random_matching,
    solve_matching,
)
from .model import (
    AREA_SIDE_M,
    BITS_PER_MB,
    DEVICE_MODELS,
    DeviceSpec,
    ScenarioConfig,
    Subtask,
    Task,
    ValueWeights,
    benchmark_task,
    builtin_ics_catalog,
    device_from_model,
    load_scenario,
    validate_task,
)
from .rng import SplitMix64
from .trust import (
    TrustLedger,
    bootstrap_trust,
    pairwise_trust,
    record_outcome,
    sample_outcome,
    task_specific_trust,
)

# substream keys, one per purpose, so draws never interleave across stages
STREAM_BOOTSTRAP = 10
STREAM_EVOLUTION = 11
STREAM_RANDOM_SOLVER = 12
STREAM_FLEET = 13
STREAM_INSTANCE = 14
STREAM_POSITIONS = 15

SOLVER_NAMES = ("ttr", "one_to_one", "nn", "random", "oracle")

SWEEP_AXES = ("min_trust", "min_rate", "fleet_size", "value_weights", "trust_weights")

#: device models replicated in equal numbers when scaling the fleet
SCALING_MODELS = ("pixel8", "dell5200", "dell5820", "lambda", "rosbot")

CSV_COLUMNS = ["sweep_axis", "sweep_value", "solver", "seed", "avg_value",
               "assigned_count", "unassigned_count", "iterations", "runtime_ms"]


@dataclass(frozen=True)
class TrustEvolutionSpec:
    collaborators: tuple[int, ...] = (2, 3, 16)
    n_tasks: int = 30


@dataclass(frozen=True)
class FleetReliabilitySpec:
    """Per-device reliability mixture for generated fleets: each supported
    type is independently reliable (good) or a lemon (bad)."""

    good: float = 0.95
    bad: float = 0.05
    p_good: float = 0.7


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple


@dataclass
class ExperimentSpec:
    scenario: ScenarioConfig
    task: Task
    bootstrap_tasks: int = 500
    bootstrap_initiator: int | None = None  # None: uniformly random initiators
    seed: int = 1
    repeats: int = 1
    solvers: tuple[str, ...] = ("ttr", "one_to_one", "nn", "random")
    sweep: SweepSpec | None = None
    trust_evolution: TrustEvolutionSpec | None = None
    fleet_reliability: FleetReliabilitySpec | None = None
    resample_positions: bool = False  # redraw device layout per replica seed
    oracle_max_subtasks: int = 5
    oracle_max_devices: int = 12

    def __post_init__(self) -> None:
        unknown = set(self.solvers) - set(SOLVER_NAMES)
        if unknown:
            raise ValueError(f"unknown solvers {sorted(unknown)}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.sweep is not None and self.sweep.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.sweep.axis!r}")

    def seeds(self) -> list[int]:
        return [self.seed + k for k in range(self.repeats)]


@dataclass
class ResultRow:
    sweep_axis: str
    sweep_value: str
    solver: str
    seed: int
    avg_value: float
    assigned_count: int
    unassigned_count: int
    iterations: int
    runtime_ms: float
    detail: dict = field(default_factory=dict)

    def csv_fields(self, include_runtime: bool) -> list:
        return [self.sweep_axis, self.sweep_value, self.solver, self.seed,
                self.avg_value, self.assigned_count, self.unassigned_count,
                self.iterations, self.runtime_ms if include_runtime else 0]

    def to_dict(self) -> dict:
        return {"sweep_axis": self.sweep_axis, "sweep_value": self.sweep_value,
                "solver": self.solver, "seed": self.seed,
                "avg_value": self.avg_value, "assigned_count": self.assigned_count,
                "unassigned_count": self.unassigned_count,
                "iterations": self.iterations, "runtime_ms": self.runtime_ms,
                "detail": self.detail}

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRow":
        return cls(d["sweep_axis"], d["sweep_value"], d["solver"], int(d["seed"]),
                   float(d["avg_value"]), int(d["assigned_count"]),
                   int(d["unassigned_count"]), int(d["iterations"]),
                   float(d["runtime_ms"]), d.get("detail", {}))


@dataclass(frozen=True)
class TrustSnapshot:
    task_index: int
    collaborator: int
    kind: str  # "task_specific" or "one_to_one"
    task_type: int | None
    trust: float

    def to_dict(self) -> dict:
        return {"task_index": self.task_index, "collaborator": self.collaborator,
                "kind": self.kind, "task_type": self.task_type, "trust": self.trust}


@dataclass
class RunArtifacts:
    rows: list[ResultRow] = field(default_factory=list)
    trust_trajectories: list[TrustSnapshot] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)

    def aggregate(self) -> None:
        """Mean and population stddev of avg_value per (sweep value, solver)."""
        groups: dict[tuple[str, str], list[float]] = {}
        for row in self.rows:
            groups.setdefault((row.sweep_value, row.solver), []).append(row.avg_value)
        self.summary = []
        for (value, solver), vals in sorted(groups.items()):
            mean = sum(vals) / len(vals)
            var = sum((v - mean) ** 2 for v in vals) / len(vals)
            self.summary.append({"sweep_value": value, "solver": solver,
                                 "mean": mean, "std": math.sqrt(var),
                                 "n": len(vals)})


def format_sweep_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return "|".join(str(float(v)) for v in value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return str(float(value))


# ---------------------------------------------------------------------------
# Sweep-axis application
# ---------------------------------------------------------------------------

def _retarget_subtasks(task: Task, **fields) -> Task:
    return replace(task, subtasks=tuple(replace(b, **fields) for b in task.subtasks))


def scaled_fleet_scenario(base: ScenarioConfig, n_collaborators: int,
                          rng: SplitMix64,
                          reliability: FleetReliabilitySpec | None = None
                          ) -> ScenarioConfig:
    """Fleet of the scaling device models in equal numbers plus the tablet
    initiator (id 1), positions drawn from the replica stream.

    With a reliability mixture, each collaborator's supported types are
    independently good or bad; without one, the catalog default applies.
    """
    if n_collaborators < len(SCALING_MODELS):
        raise ValueError("fleet size must cover every device model")
    per_model, remainder = divmod(n_collaborators, len(SCALING_MODELS))
    devices = [device_from_model(1, "ipad",
                                 (rng.uniform(0, AREA_SIDE_M), rng.uniform(0, AREA_SIDE_M)))]
    next_id = 2
    for k, model in enumerate(SCALING_MODELS):
        count = per_model + (1 if k < remainder else 0)
        for _ in range(count):
            pos = (rng.uniform(0, AREA_SIDE_M), rng.uniform(0, AREA_SIDE_M))
            rel = None
            if reliability is not None:
                types = DEVICE_MODELS[model][2]
                rel = {s: (reliability.good if rng.random() < reliability.p_good
                           else reliability.bad)
                       for s in sorted(types)}
            devices.append(device_from_model(next_id, model, pos, rel))
            next_id += 1
    return replace(base, devices=tuple(devices))


def apply_sweep_value(spec: ExperimentSpec, axis: str, value,
                      rng: SplitMix64) -> tuple[ScenarioConfig, Task]:
    scenario, task = spec.scenario, spec.task
    if axis == "none":
        return scenario, task
    if axis == "min_trust":
        return scenario, _retarget_subtasks(task, min_trust=float(value))
    if axis == "min_rate":
        return scenario, _retarget_subtasks(task, min_rate_bps=float(value))
    if axis == "value_weights":
        xi = float(value)
        return replace(scenario, value_weights=ValueWeights(xi, 1.0 - xi)), task
    if axis == "trust_weights":
        beta = tuple(float(b) for b in value)
        tw = replace(scenario.trust_weights, beta=beta)
        return replace(scenario, trust_weights=tw), task
    if axis == "fleet_size":
        fleet = scaled_fleet_scenario(scenario, int(value), rng.split(STREAM_FLEET),
                                      spec.fleet_reliability)
        return fleet, task
    raise ValueError(f"unknown sweep axis {axis!r}")


# ---------------------------------------------------------------------------
# Replica execution
# ---------------------------------------------------------------------------

def _run_solver(name: str, task: Task, ctx: MatchContext, rng: SplitMix64,
                spec: ExperimentSpec) -> MatchResult:
    if name == "ttr":
        return solve_matching(task, ctx)
    if name == "one_to_one":
        return one_to_one_trust_matching(task, ctx.scenario, ctx.ledger)
    if name == "nn":
        return nearest_neighbor_matching(task, ctx)
    if name == "random":
        return random_matching(task, ctx, rng.split(STREAM_RANDOM_SOLVER))
    if name == "oracle":
        return brute_force_matching(task, ctx, spec.oracle_max_subtasks,
                                    spec.oracle_max_devices)
    raise ValueError(f"unknown solver {name!r}")


def _trust_evolution_loop(spec: ExperimentSpec, scenario: ScenarioConfig,
                          ledger: TrustLedger, rng: SplitMix64
                          ) -> list[TrustSnapshot]:
    """Fixed-collaborator protocol: each task's subtasks are dealt randomly
    to the designated collaborators (a permutation when counts line up, so
    no collaborator handles two subtasks of one task), outcomes recorded,
    and the initiator's trust toward each collaborator snapshotted."""
    evo = spec.trust_evolution
    assert evo is not None
    task = spec.task
    collaborators = list(evo.collaborators)
    snapshots: list[TrustSnapshot] = []
    for t in range(evo.n_tasks):
        if len(task.subtasks) == len(collaborators):
            targets = list(collaborators)
            rng.shuffle(targets)
        else:
            targets = [collaborators[rng.randrange(len(collaborators))]
                       for _ in task.subtasks]
        for b, c in zip(task.subtasks, targets):
            draw = sample_outcome(scenario, task.initiator, c, b.task_type, rng)
            record_outcome(ledger, task.initiator, c, b, draw,
                           scenario.loss_threshold)
        snapshots.extend(_snapshot_trust(scenario, ledger, task.initiator,
                                         collaborators, t + 1))
    return snapshots


def _snapshot_trust(scenario: ScenarioConfig, ledger: TrustLedger,
                    initiator: int, collaborators: list[int],
                    task_index: int) -> list[TrustSnapshot]:
    ctx = build_context(scenario, ledger)
    weights = scenario.trust_weights
    b1, b2, b3 = weights.beta
    out: list[TrustSnapshot] = []
    init_dev = scenario.device(initiator)
    for c in collaborators:
        shared = sorted(init_dev.supported_types & scenario.device(c).supported_types)
        for s in shared:
            t = task_specific_trust(ctx.graph, ledger, initiator, c, s, weights)
            out.append(TrustSnapshot(task_index, c, "task_specific", s, t))
        rating = pairwise_trust(ledger, initiator, c, scenario, weights)
        oto = b1 * ctx.graph.overall[c] + (b2 + b3) * rating
        out.append(TrustSnapshot(task_index, c, "one_to_one", None, oto))
    return out


def _resample_positions(scenario: ScenarioConfig, rng: SplitMix64) -> ScenarioConfig:
    devices = tuple(
        replace(d, position=(rng.uniform(0, AREA_SIDE_M), rng.uniform(0, AREA_SIDE_M)))
        for d in scenario.devices
    )
    return replace(scenario, devices=devices)


def run_replica(spec: ExperimentSpec, axis: str, value, seed: int
                ) -> tuple[list[ResultRow], list[TrustSnapshot]]:
    """Execute one (sweep value, seed) cell: bootstrap, optional trust
    evolution, then every requested solver on the task batch."""
    rng = SplitMix64(seed)
    scenario, task = apply_sweep_value(spec, axis, value, rng)
    if spec.resample_positions and axis != "fleet_size":
        # fleet_size scenarios already draw fresh positions per replica
        scenario = _resample_positions(scenario, rng.split(STREAM_POSITIONS))
    problems = validate_task(task, scenario)
    if problems:
        raise ValueError(f"invalid task for this scenario: {problems[0]}")

    ledger = TrustLedger()
    bootstrap_trust(scenario, ledger, spec.bootstrap_tasks,
                    rng.split(STREAM_BOOTSTRAP),
                    fixed_initiator=spec.bootstrap_initiator)

    snapshots: list[TrustSnapshot] = []
    if spec.trust_evolution is not None:
        snapshots = _trust_evolution_loop(spec, scenario, ledger,
                                          rng.split(STREAM_EVOLUTION))

    ctx = build_context(scenario, ledger)
    value_str = format_sweep_value(value)
    rows: list[ResultRow] = []
    for name in spec.solvers:
        start = time.perf_counter()
        try:
            result = _run_solver(name, task, ctx, rng, spec)
            elapsed_ms = (time.perf_counter() - start) * 1e3
            rows.append(ResultRow(
                sweep_axis=axis, sweep_value=value_str, solver=name, seed=seed,
                avg_value=result.average_value,
                assigned_count=len(result.assignment),
                unassigned_count=len(result.unassigned),
                iterations=result.diagnostics.iterations,
                runtime_ms=elapsed_ms,
                detail=result.to_dict(),
            ))
        except MatchingError as exc:
            elapsed_ms = (time.perf_counter() - start) * 1e3
            rows.append(ResultRow(
                sweep_axis=axis, sweep_value=value_str, solver=name, seed=seed,
                avg_value=0.0, assigned_count=0,
                unassigned_count=len(task.subtasks), iterations=0,
                runtime_ms=elapsed_ms,
                detail={"error": f"{type(exc).__name__}: {exc}"},
            ))
    return rows, snapshots


def run_scenario(spec: ExperimentSpec) -> RunArtifacts:
    """All seeds of the spec at its base configuration (no sweep axis)."""
    artifacts = RunArtifacts()
    for seed in spec.seeds():
        rows, snapshots = run_replica(spec, "none", None, seed)
        artifacts.rows.extend(rows)
        artifacts.trust_trajectories.extend(snapshots)
    artifacts.aggregate()
    return artifacts


def run_sweep(spec: ExperimentSpec) -> RunArtifacts:
    """Cartesian product of sweep values and seeds."""
    if spec.sweep is None:
        return run_scenario(spec)
    artifacts = RunArtifacts()
    for value in spec.sweep.values:
        for seed in spec.seeds():
            rows, snapshots = run_replica(spec, spec.sweep.axis, value, seed)
            artifacts.rows.extend(rows)
            artifacts.trust_trajectories.extend(snapshots)
    artifacts.aggregate()
    return artifacts


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def emit_results(artifacts: RunArtifacts, fmt: str, path: str | Path,
                 include_runtime: bool = False) -> Path:
    """Write the results table.

    CSV holds exactly the pinned columns; runtime_ms is zeroed unless
    include_runtime is set, because wall-clock timings would break the
    byte-identity guarantee for repeated runs.  JSON mirrors the rows with
    full per-subtask detail plus the aggregated summary.
    """
    if not artifacts.rows:
        raise ValueError("no rows to emit")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in artifacts.rows:
                writer.writerow(row.csv_fields(include_runtime))
    elif fmt == "json":
        payload = {
            "rows": [r.to_dict() for r in artifacts.rows],
            "summary": artifacts.summary,
            "trust_trajectories": [s.to_dict() for s in artifacts.trust_trajectories],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown format {fmt!r} (expected 'csv' or 'json')")
    return path


def load_results_json(path: str | Path) -> RunArtifacts:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    artifacts = RunArtifacts(
        rows=[ResultRow.from_dict(d) for d in payload["rows"]],
        trust_trajectories=[TrustSnapshot(d["task_index"], d["collaborator"],
                                          d["kind"], d["task_type"], d["trust"])
                            for d in payload.get("trust_trajectories", [])],
        summary=payload.get("summary", []),
    )
    return artifacts


def emit_trust_trajectories(artifacts: RunArtifacts, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_index", "collaborator", "kind", "task_type", "trust"])
        for s in artifacts.trust_trajectories:
            writer.writerow([s.task_index, s.collaborator, s.kind,
                             "" if s.task_type is None else s.task_type, s.trust])
    return path


# ---------------------------------------------------------------------------
# Spec files
# ---------------------------------------------------------------------------

_SPEC_KEYS = {"scenario", "bootstrap_tasks", "bootstrap_initiator", "seed",
              "repeats", "solvers", "task", "sweep", "trust_evolution",
              "fleet_reliability", "resample_positions",
              "oracle_max_subtasks", "oracle_max_devices"}


def _task_from_spec(raw, scenario: ScenarioConfig) -> Task:
    if raw is None:
        return benchmark_task()
    if "subtasks" in raw:
        subtasks = tuple(Subtask(int(b["task_type"]), float(b["size_bits"]),
                                 float(b["deadline_s"]), float(b["min_trust"]),
                                 float(b["min_rate_bps"]))
                         for b in raw["subtasks"])
        return Task(int(raw.get("initiator", 1)), subtasks)
    return benchmark_task(initiator=int(raw.get("initiator", 1)),
                          four_subtasks=bool(raw.get("four_subtasks", False)))


def load_experiment_spec(path: str | Path,
                         scenario_override: str | Path | None = None
                         ) -> ExperimentSpec:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = set(raw) - _SPEC_KEYS
    if unknown:
        raise ValueError(f"experiment spec: unknown keys {sorted(unknown)}")

    scenario_ref = scenario_override or raw.get("scenario", "ics")
    if str(scenario_ref) == "ics":
        scenario = builtin_ics_catalog()
    else:
        scenario = load_scenario(scenario_ref)

    sweep = None
    if raw.get("sweep"):
        sweep = SweepSpec(axis=str(raw["sweep"]["axis"]),
                          values=tuple(raw["sweep"]["values"]))
    evolution = None
    if raw.get("trust_evolution"):
        te = raw["trust_evolution"]
        evolution = TrustEvolutionSpec(
            collaborators=tuple(int(c) for c in te.get("collaborators", (2, 3, 16))),
            n_tasks=int(te.get("tasks", 30)))
    fleet_rel = None
    if raw.get("fleet_reliability"):
        fr = raw["fleet_reliability"]
        fleet_rel = FleetReliabilitySpec(good=float(fr.get("good", 0.95)),
                                         bad=float(fr.get("bad", 0.05)),
                                         p_good=float(fr.get("p_good", 0.7)))

    return ExperimentSpec(
        scenario=scenario,
        task=_task_from_spec(raw.get("task"), scenario),
        bootstrap_tasks=int(raw.get("bootstrap_tasks", 500)),
        bootstrap_initiator=(None if raw.get("bootstrap_initiator") is None
                             else int(raw["bootstrap_initiator"])),
        seed=int(raw.get("seed", 1)),
        repeats=int(raw.get("repeats", 1)),
        solvers=tuple(raw.get("solvers", ("ttr", "one_to_one", "nn", "random"))),
        sweep=sweep,
        trust_evolution=evolution,
        fleet_reliability=fleet_rel,
        resample_positions=bool(raw.get("resample_positions", False)),
        oracle_max_subtasks=int(raw.get("oracle_max_subtasks", 5)),
        oracle_max_devices=int(raw.get("oracle_max_devices", 12)),
    )


# ---------------------------------------------------------------------------
# Random small instances (oracle comparisons)
# ---------------------------------------------------------------------------

@dataclass
class SmallInstance:
    scenario: ScenarioConfig
    task: Task
    ledger: TrustLedger


def random_small_instance(rng: SplitMix64, base: ScenarioConfig | None = None,
                          max_devices: int = 8, max_subtasks: int = 3,
                          min_trust: float = 0.2,
                          bootstrap_tasks: int = 120) -> SmallInstance:
    """A seeded matching instance small enough for exhaustive search.

    With a base scenario, devices are subsampled from its fleet; otherwise a
    synthetic heterogeneous fleet is drawn.  Subtask types always have at
    least one supporter besides the initiator.
    """
    template = base or builtin_ics_catalog()
    n_dev = rng.randint(4, max_devices)
    n_sub = rng.randint(1, max_subtasks)

    if base is not None:
        pool = list(base.devices)
        rng.shuffle(pool)
        chosen = sorted(pool[:n_dev], key=lambda d: d.id)
        devices = tuple(replace(d) for d in chosen)
    else:
        synthesized = []
        type_ids = [t.id for t in template.task_types]
        for i in range(n_dev):
            supported = frozenset(s for s in type_ids if rng.random() < 0.6)
            if not supported:
                supported = frozenset({type_ids[rng.randrange(len(type_ids))]})
            reliability = {s: rng.uniform(0.6, 1.0) for s in sorted(supported)}
            cpu_hz = 10.0 ** rng.uniform(8.0, math.log10(5e9))
            synthesized.append(_make_device(i + 1, cpu_hz, rng, supported, reliability))
        devices = tuple(synthesized)

    scenario = replace(template, devices=devices)
    initiator = devices[0].id

    # Only types the initiator itself supports carry defined task-specific
    # trust, so restrict generated subtasks to those with a real candidate.
    supportable = [t.id for t in scenario.task_types
                   if devices[0].supports(t.id)
                   and any(d.id != initiator and d.supports(t.id) for d in devices)]
    if not supportable:
        # Degenerate draw; retry with a derived stream.
        return random_small_instance(rng.split(STREAM_INSTANCE), base, max_devices,
                                     max_subtasks, min_trust, bootstrap_tasks)

    subtasks = tuple(
        Subtask(task_type=supportable[rng.randrange(len(supportable))],
                size_bits=rng.uniform(1.0, 10.0) * BITS_PER_MB,
                deadline_s=rng.uniform(0.5, 2.0),
                min_trust=min_trust,
                min_rate_bps=rng.uniform(1.0, 5.0) * BITS_PER_MB)
        for _ in range(n_sub)
    )
    task = Task(initiator=initiator, subtasks=subtasks)

    ledger = TrustLedger()
    bootstrap_trust(scenario, ledger, bootstrap_tasks, rng.split(STREAM_BOOTSTRAP))
    return SmallInstance(scenario=scenario, task=task, ledger=ledger)


def _make_device(device_id: int, cpu_hz: float, rng: SplitMix64,
                 supported: frozenset, reliability: dict) -> DeviceSpec:
    return DeviceSpec(
        id=device_id,
        cpu_hz=cpu_hz,
        position=(rng.uniform(0, AREA_SIDE_M), rng.uniform(0, AREA_SIDE_M)),
        tx_power_w=rng.uniform(0.5, 1.0),
        supported_types=supported,
        reliability=reliability,
    )


@dataclass
class OracleComparison:
    instances: int
    feasibility_failures: int
    value_regressions: int  # solver value above oracle value (must stay 0)
    gaps: list[float]

    @property
    def within_5pct(self) -> float:
        if not self.instances:
            return 0.0
        return sum(1 for g in self.gaps if g <= 0.05) / self.instances

    @property
    def max_gap(self) -> float:
        return max(self.gaps, default=0.0)

    @property
    def mean_gap(self) -> float:
        return sum(self.gaps) / len(self.gaps) if self.gaps else 0.0

    @property
    def ok(self) -> bool:
        return self.feasibility_failures == 0 and self.value_regressions == 0


def compare_with_oracle(n_instances: int, seed: int,
                        base: ScenarioConfig | None = None,
                        max_subtasks: int = 3,
                        max_devices: int = 8) -> OracleComparison:
    """Run the game solver against exhaustive search on seeded instances.

    The gap is (oracle - solver) / oracle, floored at zero.  Any infeasible
    solver assignment or solver value above the optimum counts as a failure.
    """
    from .matching import check_feasibility

    master = SplitMix64(seed)
    report = OracleComparison(n_instances, 0, 0, [])
    for k in range(n_instances):
        inst = random_small_instance(master.split(k), base, max_devices, max_subtasks)
        ctx = build_context(inst.scenario, inst.ledger)
        oracle = brute_force_matching(inst.task, ctx,
                                      max_subtasks=max_subtasks,
                                      max_devices=max_devices)
        try:
            solved = solve_matching(inst.task, ctx)
        except MatchingError:
            solved = None
        if solved is None:
            gap = 1.0 if oracle.average_value > 0 else 0.0
            report.gaps.append(gap)
            continue
        if check_feasibility(solved.assignment, inst.task, ctx):
            report.feasibility_failures += 1
        if solved.average_value > oracle.average_value + 1e-9:
            report.value_regressions += 1
        if oracle.average_value > 0:
            gap = max(0.0, (oracle.average_value - solved.average_value)
                      / oracle.average_value)
        else:
            gap = 0.0
        report.gaps.append(gap)
    return report

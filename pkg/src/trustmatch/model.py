"""Domain types, scenario configuration, and the built-in device catalog.

All quantities are SI: bits, seconds, joules, watts, Hz, bits/second.
Data sizes quoted in MB convert at 8e6 bits per MB.  Every type here is an
immutable value object; after a scenario is loaded nothing mutates, so
configs can be shared freely across parallel experiment replicas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .rng import SplitMix64

BITS_PER_MB = 8e6

#: substream key for sampling device positions from a scenario seed
POSITION_STREAM = 1


class ScenarioError(ValueError):
    """Raised when a scenario file cannot be parsed or fails validation."""


@dataclass(frozen=True)
class Violation:
    """One violated invariant, as data rather than an exception."""

    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.path}: {self.message}"


@dataclass(frozen=True)
class TaskType:
    id: int
    name: str
    processing_density: float  # CPU cycles per input bit


@dataclass(frozen=True)
class DeviceSpec:
    id: int
    cpu_hz: float
    position: tuple[float, ...]  # meters, 2-D or 3-D
    tx_power_w: float
    supported_types: frozenset[int]
    reliability: dict[int, float] = field(default_factory=dict)

    def supports(self, task_type: int) -> bool:
        return task_type in self.supported_types


@dataclass(frozen=True)
class Subtask:
    task_type: int
    size_bits: float
    deadline_s: float
    min_trust: float
    min_rate_bps: float


@dataclass(frozen=True)
class Task:
    initiator: int
    subtasks: tuple[Subtask, ...]


@dataclass(frozen=True)
class TrustWeights:
    beta: tuple[float, float, float]  # overall / direct / per-type mix
    delta: tuple[float, float, float]  # cooperativeness / proximity / history mix
    neutral_prior: float = 0.5


def one_to_one_weights(weights: TrustWeights) -> TrustWeights:
    """Collapse the per-type component, folding its weight into direct trust.

    This is the single-valued trust baseline: the first mixing weight is
    kept and the remainder goes to the direct term, so the triple still
    sums to one.
    """
    b1, b2, b3 = weights.beta
    return replace(weights, beta=(b1, b2 + b3, 0.0))


@dataclass(frozen=True)
class ValueWeights:
    xi_time: float
    xi_energy: float


@dataclass(frozen=True)
class PathlossChannel:
    """Log-distance channel: rate derives from power, distance and noise."""

    bandwidth_hz: float
    noise_w: float
    alpha: float = 4.0


@dataclass(frozen=True)
class MatrixChannel:
    """Measured link rates: rates_bps[i][j] indexed by device list order."""

    rates_bps: tuple[tuple[float, ...], ...]
    index: dict[int, int]  # device id -> row/column


Channel = PathlossChannel | MatrixChannel


@dataclass(frozen=True)
class LinkLossModel:
    """Mean packet loss rate per ordered device pair.

    A scalar applies to every pair; a matrix is indexed like MatrixChannel.
    """

    default: float = 0.0
    matrix: tuple[tuple[float, ...], ...] | None = None
    index: dict[int, int] | None = None

    def mean_loss(self, sender_id: int, receiver_id: int) -> float:
        if self.matrix is None:
            return self.default
        assert self.index is not None
        return self.matrix[self.index[sender_id]][self.index[receiver_id]]


@dataclass(frozen=True)
class ReplicatorParams:
    max_iters: int = 1000
    convergence_eps: float = 1e-9
    ess_threshold: float | None = None  # None -> 1 / (2 N)


@dataclass(frozen=True)
class ScenarioConfig:
    task_types: tuple[TaskType, ...]
    devices: tuple[DeviceSpec, ...]
    channel: Channel
    link_loss: LinkLossModel
    trust_weights: TrustWeights
    value_weights: ValueWeights
    loss_threshold: float
    replicator: ReplicatorParams
    rng_seed: int

    def device(self, device_id: int) -> DeviceSpec:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(f"unknown device id {device_id}")

    def device_ids(self) -> list[int]:
        return [d.id for d in self.devices]

    def task_type(self, type_id: int) -> TaskType:
        for t in self.task_types:
            if t.id == type_id:
                return t
        raise KeyError(f"unknown task type id {type_id}")

    def supporters(self, type_id: int) -> list[int]:
        """Device ids supporting a task type, in catalog order."""
        return [d.id for d in self.devices if d.supports(type_id)]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check_simplex(triple, path: str, out: list[Violation]) -> None:
    if len(triple) != 3:
        out.append(Violation("shape", path, "expected exactly 3 weights"))
        return
    if any(w < 0 or w > 1 for w in triple):
        out.append(Violation("range", path, f"weights must lie in [0,1], got {triple}"))
    if abs(sum(triple) - 1.0) > 1e-9:
        out.append(Violation("simplex", path, f"weights must sum to 1, got {sum(triple)!r}"))


def _check_square(matrix, n: int, path: str, out: list[Violation]) -> bool:
    if len(matrix) != n or any(len(row) != n for row in matrix):
        out.append(Violation("shape", path, f"expected a {n}x{n} matrix"))
        return False
    return True


def validate_scenario(cfg: ScenarioConfig) -> list[Violation]:
    """Check every invariant; returns an empty list iff the config is valid."""
    out: list[Violation] = []

    type_ids = [t.id for t in cfg.task_types]
    if sorted(type_ids) != list(range(len(cfg.task_types))):
        out.append(Violation("id-density", "task_types", "task type ids must be dense 0..S-1"))
    names = [t.name for t in cfg.task_types]
    if len(set(names)) != len(names):
        out.append(Violation("duplicate-name", "task_types", "task type names must be unique"))
    for i, t in enumerate(cfg.task_types):
        if t.processing_density <= 0:
            out.append(Violation("range", f"task_types[{i}].processing_density",
                                 "must be > 0"))

    known_types = set(type_ids)
    seen_ids: set[int] = set()
    for i, d in enumerate(cfg.devices):
        path = f"devices[{i}]"
        if d.id in seen_ids:
            out.append(Violation("duplicate-id", path, f"device id {d.id} already used"))
        seen_ids.add(d.id)
        if d.cpu_hz <= 0:
            out.append(Violation("range", f"{path}.cpu_hz", "must be > 0"))
        if d.tx_power_w <= 0:
            out.append(Violation("range", f"{path}.tx_power_w", "must be > 0"))
        if len(d.position) not in (2, 3):
            out.append(Violation("shape", f"{path}.position", "must be 2-D or 3-D"))
        if not d.supported_types:
            out.append(Violation("empty", f"{path}.supported_types", "must be non-empty"))
        if not d.supported_types <= known_types:
            out.append(Violation("ref", f"{path}.supported_types",
                                 f"unknown task types {sorted(d.supported_types - known_types)}"))
        for s, p in sorted(d.reliability.items()):
            if s not in d.supported_types:
                out.append(Violation("ref", f"{path}.reliability[{s}]",
                                     "reliability given for an unsupported type"))
            if not 0.0 <= p <= 1.0:
                out.append(Violation("range", f"{path}.reliability[{s}]",
                                     f"must lie in [0,1], got {p!r}"))

    n = len(cfg.devices)
    if isinstance(cfg.channel, PathlossChannel):
        ch = cfg.channel
        if ch.bandwidth_hz <= 0:
            out.append(Violation("range", "channel.bandwidth_hz", "must be > 0"))
        if ch.noise_w <= 0:
            out.append(Violation("range", "channel.noise_w", "must be > 0"))
        if ch.alpha <= 0:
            out.append(Violation("range", "channel.alpha", "must be > 0"))
    else:
        if _check_square(cfg.channel.rates_bps, n, "channel.rates_bps", out):
            for i, row in enumerate(cfg.channel.rates_bps):
                for j, r in enumerate(row):
                    if r < 0:
                        out.append(Violation("range", f"channel.rates_bps[{i}][{j}]",
                                             "must be >= 0"))

    if cfg.link_loss.matrix is not None:
        if _check_square(cfg.link_loss.matrix, n, "link_loss", out):
            for i, row in enumerate(cfg.link_loss.matrix):
                for j, v in enumerate(row):
                    if not 0.0 <= v <= 1.0:
                        out.append(Violation("range", f"link_loss[{i}][{j}]",
                                             "must lie in [0,1]"))
    elif not 0.0 <= cfg.link_loss.default <= 1.0:
        out.append(Violation("range", "link_loss", "must lie in [0,1]"))

    _check_simplex(cfg.trust_weights.beta, "trust_weights.beta", out)
    _check_simplex(cfg.trust_weights.delta, "trust_weights.delta", out)
    if not 0.0 <= cfg.trust_weights.neutral_prior <= 1.0:
        out.append(Violation("range", "trust_weights.neutral_prior", "must lie in [0,1]"))

    vw = cfg.value_weights
    if not (0.0 <= vw.xi_time <= 1.0 and 0.0 <= vw.xi_energy <= 1.0):
        out.append(Violation("range", "value_weights", "weights must lie in [0,1]"))
    if abs(vw.xi_time + vw.xi_energy - 1.0) > 1e-9:
        out.append(Violation("simplex", "value_weights", "xi_time + xi_energy must equal 1"))

    if not 0.0 <= cfg.loss_threshold <= 1.0:
        out.append(Violation("range", "loss_threshold", "must lie in [0,1]"))

    rp = cfg.replicator
    if rp.max_iters < 1:
        out.append(Violation("range", "replicator.max_iters", "must be >= 1"))
    if rp.convergence_eps <= 0:
        out.append(Violation("range", "replicator.convergence_eps", "must be > 0"))
    if rp.ess_threshold is not None and not 0.0 < rp.ess_threshold < 1.0:
        out.append(Violation("range", "replicator.ess_threshold", "must lie in (0,1)"))

    return out


def validate_subtask(b: Subtask, cfg: ScenarioConfig, path: str = "subtask") -> list[Violation]:
    out: list[Violation] = []
    if all(t.id != b.task_type for t in cfg.task_types):
        out.append(Violation("ref", f"{path}.task_type", f"unknown task type {b.task_type}"))
    if b.size_bits <= 0:
        out.append(Violation("range", f"{path}.size_bits", "must be > 0"))
    if b.deadline_s <= 0:
        out.append(Violation("range", f"{path}.deadline_s", "must be > 0"))
    if not 0.0 <= b.min_trust <= 1.0:
        out.append(Violation("range", f"{path}.min_trust", "must lie in [0,1]"))
    if b.min_rate_bps < 0:
        out.append(Violation("range", f"{path}.min_rate_bps", "must be >= 0"))
    return out


def validate_task(task: Task, cfg: ScenarioConfig) -> list[Violation]:
    out: list[Violation] = []
    if task.initiator not in set(cfg.device_ids()):
        out.append(Violation("ref", "task.initiator", f"unknown device {task.initiator}"))
    if not 1 <= len(task.subtasks) < len(cfg.devices):
        out.append(Violation("range", "task.subtasks",
                             "need 1 <= subtask count < fleet size"))
    for m, b in enumerate(task.subtasks):
        out.extend(validate_subtask(b, cfg, f"task.subtasks[{m}]"))
    return out


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

_TOP_KEYS = {"task_types", "devices", "channel", "link_loss", "trust_weights",
             "value_weights", "loss_threshold", "replicator", "rng_seed"}


def _reject_unknown(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"{path}: unknown keys {sorted(unknown)}")


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from parsed JSON; structural errors raise."""
    if not isinstance(raw, dict):
        raise ScenarioError("scenario root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "scenario")
    missing = _TOP_KEYS - set(raw)
    if missing:
        raise ScenarioError(f"scenario: missing keys {sorted(missing)}")

    try:
        task_types = tuple(
            TaskType(int(t["id"]), str(t["name"]), float(t["processing_density"]))
            for t in raw["task_types"]
        )
        devices = []
        for d in raw["devices"]:
            _reject_unknown(d, {"id", "cpu_hz", "position", "tx_power_w",
                                "supported_types", "reliability"}, "device")
            supported = frozenset(int(s) for s in d["supported_types"])
            reliability = {int(k): float(v) for k, v in d.get("reliability", {}).items()}
            for s in supported:
                reliability.setdefault(s, 0.95)
            devices.append(DeviceSpec(
                id=int(d["id"]),
                cpu_hz=float(d["cpu_hz"]),
                position=tuple(float(x) for x in d["position"]),
                tx_power_w=float(d["tx_power_w"]),
                supported_types=supported,
                reliability=reliability,
            ))
        devices = tuple(devices)
        index = {d.id: i for i, d in enumerate(devices)}

        ch = raw["channel"]
        model = ch.get("model")
        if model == "pathloss":
            _reject_unknown(ch, {"model", "bandwidth_hz", "noise_w", "alpha"}, "channel")
            channel: Channel = PathlossChannel(
                bandwidth_hz=float(ch["bandwidth_hz"]),
                noise_w=float(ch["noise_w"]),
                alpha=float(ch.get("alpha", 4.0)),
            )
        elif model == "matrix":
            _reject_unknown(ch, {"model", "rates_bps"}, "channel")
            channel = MatrixChannel(
                rates_bps=tuple(tuple(float(r) for r in row) for row in ch["rates_bps"]),
                index=index,
            )
        else:
            raise ScenarioError(f"channel.model must be 'pathloss' or 'matrix', got {model!r}")

        ll = raw["link_loss"]
        if isinstance(ll, (int, float)):
            link_loss = LinkLossModel(default=float(ll))
        else:
            link_loss = LinkLossModel(
                default=0.0,
                matrix=tuple(tuple(float(v) for v in row) for row in ll),
                index=index,
            )

        tw = raw["trust_weights"]
        _reject_unknown(tw, {"beta", "delta", "neutral_prior"}, "trust_weights")
        trust_weights = TrustWeights(
            beta=tuple(float(b) for b in tw["beta"]),
            delta=tuple(float(d) for d in tw["delta"]),
            neutral_prior=float(tw.get("neutral_prior", 0.5)),
        )

        vw = raw["value_weights"]
        _reject_unknown(vw, {"xi_time", "xi_energy"}, "value_weights")
        value_weights = ValueWeights(float(vw["xi_time"]), float(vw["xi_energy"]))

        rp = raw["replicator"]
        _reject_unknown(rp, {"max_iters", "convergence_eps", "ess_threshold"}, "replicator")
        ess = rp.get("ess_threshold")
        replicator = ReplicatorParams(
            max_iters=int(rp.get("max_iters", 1000)),
            convergence_eps=float(rp.get("convergence_eps", 1e-9)),
            ess_threshold=None if ess is None else float(ess),
        )

        return ScenarioConfig(
            task_types=task_types,
            devices=devices,
            channel=channel,
            link_loss=link_loss,
            trust_weights=trust_weights,
            value_weights=value_weights,
            loss_threshold=float(raw["loss_threshold"]),
            replicator=replicator,
            rng_seed=int(raw["rng_seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    if isinstance(cfg.channel, PathlossChannel):
        channel = {"model": "pathloss", "bandwidth_hz": cfg.channel.bandwidth_hz,
                   "noise_w": cfg.channel.noise_w, "alpha": cfg.channel.alpha}
    else:
        channel = {"model": "matrix",
                   "rates_bps": [list(row) for row in cfg.channel.rates_bps]}
    if cfg.link_loss.matrix is not None:
        link_loss = [list(row) for row in cfg.link_loss.matrix]
    else:
        link_loss = cfg.link_loss.default
    return {
        "task_types": [{"id": t.id, "name": t.name,
                        "processing_density": t.processing_density}
                       for t in cfg.task_types],
        "devices": [{"id": d.id, "cpu_hz": d.cpu_hz, "position": list(d.position),
                     "tx_power_w": d.tx_power_w,
                     "supported_types": sorted(d.supported_types),
                     "reliability": {str(k): v for k, v in sorted(d.reliability.items())}}
                    for d in cfg.devices],
        "channel": channel,
        "link_loss": link_loss,
        "trust_weights": {"beta": list(cfg.trust_weights.beta),
                          "delta": list(cfg.trust_weights.delta),
                          "neutral_prior": cfg.trust_weights.neutral_prior},
        "value_weights": {"xi_time": cfg.value_weights.xi_time,
                          "xi_energy": cfg.value_weights.xi_energy},
        "loss_threshold": cfg.loss_threshold,
        "replicator": {"max_iters": cfg.replicator.max_iters,
                       "convergence_eps": cfg.replicator.convergence_eps,
                       "ess_threshold": cfg.replicator.ess_threshold},
        "rng_seed": cfg.rng_seed,
    }


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load, build, and fully validate a scenario file.

    Raises ScenarioError on parse failures, structural problems, or the
    first violated invariant.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    cfg = scenario_from_dict(raw)
    violations = validate_scenario(cfg)
    if violations:
        raise ScenarioError(f"{path}: {violations[0]}")
    return cfg


def dump_scenario(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(cfg), indent=2) + "\n",
                          encoding="utf-8")


# ---------------------------------------------------------------------------
# Built-in catalog
# ---------------------------------------------------------------------------

TYPE_FR, TYPE_VT, TYPE_TWC, TYPE_3DM = 0, 1, 2, 3

_TASK_TYPES = (
    TaskType(TYPE_FR, "FR", 2339.0),     # face recognition
    TaskType(TYPE_VT, "VT", 1000.0),     # video transcoding
    TaskType(TYPE_TWC, "TWC", 16800.0),  # text word count
    TaskType(TYPE_3DM, "3DM", 1500.0),   # 3-D mapping
)

#: model name -> (cpu_hz, tx_power_w, supported type ids, unit count in catalog)
DEVICE_MODELS: dict[str, tuple[float, float, frozenset[int], int]] = {
    "ipad": (2.34e9, 0.700, frozenset({TYPE_FR, TYPE_TWC, TYPE_3DM, TYPE_VT}), 1),
    "pixel8": (2.91e9, 0.740, frozenset({TYPE_FR, TYPE_TWC, TYPE_3DM}), 8),
    "dell5200": (3.8e9, 0.660, frozenset({TYPE_FR, TYPE_TWC, TYPE_VT}), 3),
    "dell5820": (3.2e9, 0.660, frozenset({TYPE_FR, TYPE_TWC, TYPE_VT}), 3),
    "lambda": (4.5e9, 0.660, frozenset({TYPE_FR, TYPE_TWC, TYPE_VT, TYPE_3DM}), 2),
    "rosbot": (168e6, 0.660, frozenset({TYPE_3DM}), 4),
    "robofleet": (72e6, 0.660, frozenset({TYPE_3DM}), 5),
}

DEFAULT_RELIABILITY = 0.95
DEFAULT_SEED = 20260810
AREA_SIDE_M = 30.0


def device_from_model(device_id: int, model: str, position: tuple[float, ...],
                      reliability: dict[int, float] | None = None) -> DeviceSpec:
    cpu_hz, power_w, types, _ = DEVICE_MODELS[model]
    rel = dict(reliability or {})
    for s in types:
        rel.setdefault(s, DEFAULT_RELIABILITY)
    return DeviceSpec(device_id, cpu_hz, position, power_w, types, rel)


def builtin_ics_catalog(rng_seed: int = DEFAULT_SEED) -> ScenarioConfig:
    """The 26-device lab fleet: one tablet, eight phones, six desktops/edge
    servers, two workstations, and nine robots, on a 30 m x 30 m floor with
    positions drawn from the scenario seed."""
    rng = SplitMix64(rng_seed).split(POSITION_STREAM)
    devices = []
    next_id = 1
    for model, (_, _, _, count) in DEVICE_MODELS.items():
        for _ in range(count):
            pos = (rng.uniform(0.0, AREA_SIDE_M), rng.uniform(0.0, AREA_SIDE_M))
            devices.append(device_from_model(next_id, model, pos))
            next_id += 1
    third = 1.0 / 3.0
    return ScenarioConfig(
        task_types=_TASK_TYPES,
        devices=tuple(devices),
        channel=PathlossChannel(bandwidth_hz=2e7, noise_w=1e-13, alpha=4.0),
        link_loss=LinkLossModel(default=0.02),
        trust_weights=TrustWeights(beta=(third, third, third),
                                   delta=(third, third, third)),
        value_weights=ValueWeights(xi_time=0.5, xi_energy=0.5),
        loss_threshold=0.05,
        replicator=ReplicatorParams(),
        rng_seed=rng_seed,
    )


def bundled_scenario_path() -> Path:
    """Path to the packaged copy of the built-in catalog."""
    return Path(str(resources.files("trustmatch").joinpath("data/ics.json")))


def benchmark_task(initiator: int = 1, four_subtasks: bool = False) -> Task:
    """The standard benchmark batch: mapping, word-count, and recognition
    subtasks, optionally extended with a transcoding subtask."""
    subtasks = [
        Subtask(TYPE_3DM, 5 * BITS_PER_MB, 0.6, 0.2, 10 * BITS_PER_MB),
        Subtask(TYPE_TWC, 1 * BITS_PER_MB, 0.6, 0.2, 2 * BITS_PER_MB),
        Subtask(TYPE_FR, 5 * BITS_PER_MB, 0.6, 0.2, 10 * BITS_PER_MB),
    ]
    if four_subtasks:
        subtasks.append(Subtask(TYPE_VT, 10 * BITS_PER_MB, 0.6, 0.2, 10 * BITS_PER_MB))
    return Task(initiator=initiator, subtasks=tuple(subtasks))


def distance(a: DeviceSpec, b: DeviceSpec) -> float:
    return math.dist(a.position, b.position)

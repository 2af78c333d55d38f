"""Collaboration cost model and the value-of-completion metric.

A subtask handed to a collaborator incurs a transmission phase and an
execution phase; link setup and result return are free.  The value metric
maps total time against the deadline and total energy against what the
initiator would have spent running the subtask itself, each into (0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    Channel,
    DeviceSpec,
    MatrixChannel,
    PathlossChannel,
    ScenarioConfig,
    Subtask,
    ValueWeights,
    distance,
)

# Energy per CPU cycle is ENERGY_COEFF * f^2 with f in GHz; keeping the
# frequency in Hz here would put MB-scale subtasks at ~1e16 J, far outside
# any mobile-device measurement, so GHz is the only usable convention.
ENERGY_COEFF = 1e-11


@dataclass(frozen=True)
class CompletionRecord:
    """Per-phase time and energy breakdown for one subtask hand-off."""

    t_tra_s: float
    t_exe_s: float
    e_tra_j: float
    e_exe_j: float

    @property
    def t_total_s(self) -> float:
        return self.t_tra_s + self.t_exe_s

    @property
    def e_total_j(self) -> float:
        return self.e_tra_j + self.e_exe_j


def transmission_rate(sender: DeviceSpec, receiver: DeviceSpec,
                      channel: Channel) -> float:
    """Link rate in bits/second from sender to receiver.

    Under the pathloss model the gain is distance^-alpha; a matrix channel
    simply returns the measured entry.
    """
    if sender.id == receiver.id:
        raise ValueError("transmission rate requires two distinct devices")
    if isinstance(channel, MatrixChannel):
        return channel.rates_bps[channel.index[sender.id]][channel.index[receiver.id]]
    dist = distance(sender, receiver)
    if dist <= 0.0:
        raise ValueError("pathloss channel undefined at zero distance")
    gain = dist ** -channel.alpha
    snr = sender.tx_power_w * gain / channel.noise_w
    return channel.bandwidth_hz * math.log2(1.0 + snr)


def execution_energy(cpu_hz: float, size_bits: float, density: float) -> float:
    f_ghz = cpu_hz / 1e9
    return ENERGY_COEFF * f_ghz * f_ghz * size_bits * density


def collaboration_cost(b: Subtask, initiator: DeviceSpec, collaborator: DeviceSpec,
                       channel: Channel, density: float) -> CompletionRecord:
    """Time/energy of offloading subtask b from initiator to collaborator.

    Computed regardless of type support so counterfactual assignments can
    be priced; the matching layer enforces support separately.
    """
    rate = transmission_rate(initiator, collaborator, channel)
    if rate <= 0.0:
        raise ValueError("transmission rate must be positive to offload")
    t_tra = b.size_bits / rate
    return CompletionRecord(
        t_tra_s=t_tra,
        t_exe_s=b.size_bits * density / collaborator.cpu_hz,
        e_tra_j=initiator.tx_power_w * t_tra,
        e_exe_j=execution_energy(collaborator.cpu_hz, b.size_bits, density),
    )


def expected_self_energy(b: Subtask, initiator: DeviceSpec, density: float) -> float:
    """Energy the initiator would spend executing b locally (no transmission)."""
    return execution_energy(initiator.cpu_hz, b.size_bits, density)


def time_value(t_total_s: float, deadline_s: float) -> float:
    """Satisfaction in (0,1]: full until the deadline, then exponential decay
    in the relative overshoot."""
    if deadline_s <= 0:
        raise ValueError("deadline must be positive")
    if t_total_s <= deadline_s:
        return 1.0
    return math.exp(-abs((t_total_s - deadline_s) / deadline_s))


def energy_value(e_actual_j: float, e_expected_j: float) -> float:
    """Satisfaction in (0,1]: full when offloading beats local execution,
    exponential decay in the relative excess otherwise."""
    if e_expected_j <= 0:
        raise ValueError("expected energy must be positive")
    if e_actual_j <= e_expected_j:
        return 1.0
    return math.exp(-abs((e_actual_j - e_expected_j) / e_expected_j))


@dataclass(frozen=True)
class ValueBreakdown:
    value: float
    time_value: float
    energy_value: float
    record: CompletionRecord
    expected_energy_j: float


def completion_value(b: Subtask, initiator: DeviceSpec, collaborator: DeviceSpec,
                     channel: Channel, weights: ValueWeights,
                     density: float) -> ValueBreakdown:
    """Weighted mix of time and energy values for one candidate hand-off."""
    rec = collaboration_cost(b, initiator, collaborator, channel, density)
    expected = expected_self_energy(b, initiator, density)
    v_time = time_value(rec.t_total_s, b.deadline_s)
    v_ener = energy_value(rec.e_total_j, expected)
    v = weights.xi_time * v_time + weights.xi_energy * v_ener
    return ValueBreakdown(v, v_time, v_ener, rec, expected)


def scenario_completion_value(cfg: ScenarioConfig, b: Subtask, initiator_id: int,
                              collaborator_id: int) -> ValueBreakdown:
    """Convenience wrapper resolving devices and density from a scenario."""
    return completion_value(
        b,
        cfg.device(initiator_id),
        cfg.device(collaborator_id),
        cfg.channel,
        cfg.value_weights,
        cfg.task_type(b.task_type).processing_density,
    )

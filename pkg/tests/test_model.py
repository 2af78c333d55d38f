"""Catalog contents, scenario validation, and file round-trips."""

import json
from dataclasses import replace

import pytest

from trustmatch.model import (
    BITS_PER_MB,
    TYPE_3DM,
    TYPE_FR,
    TYPE_TWC,
    TYPE_VT,
    ScenarioError,
    Subtask,
    Task,
    TrustWeights,
    benchmark_task,
    builtin_ics_catalog,
    bundled_scenario_path,
    dump_scenario,
    load_scenario,
    one_to_one_weights,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
    validate_task,
)


def test_catalog_has_26_devices():
    assert len(builtin_ics_catalog().devices) == 26


def test_catalog_workstation_supports_all_types():
    cfg = builtin_ics_catalog()
    lambdas = [d for d in cfg.devices if d.cpu_hz == 4.5e9]
    assert len(lambdas) == 2
    for d in lambdas:
        assert d.supported_types == {TYPE_FR, TYPE_TWC, TYPE_VT, TYPE_3DM}


def test_catalog_processing_densities():
    cfg = builtin_ics_catalog()
    by_name = {t.name: t.processing_density for t in cfg.task_types}
    assert by_name == {"FR": 2339.0, "VT": 1000.0, "TWC": 16800.0, "3DM": 1500.0}


def test_catalog_model_counts_and_power():
    cfg = builtin_ics_catalog()
    by_cpu = {}
    for d in cfg.devices:
        by_cpu.setdefault(d.cpu_hz, []).append(d)
    assert len(by_cpu[2.91e9]) == 8          # phones
    assert len(by_cpu[168e6]) == 4           # larger robots
    assert len(by_cpu[72e6]) == 5            # smaller robots
    assert by_cpu[2.34e9][0].tx_power_w == pytest.approx(0.700)
    assert by_cpu[2.91e9][0].tx_power_w == pytest.approx(0.740)
    assert by_cpu[3.8e9][0].tx_power_w == pytest.approx(0.660)


def test_catalog_weight_defaults():
    cfg = builtin_ics_catalog()
    assert cfg.trust_weights.beta == pytest.approx((1 / 3,) * 3)
    assert cfg.trust_weights.delta == pytest.approx((1 / 3,) * 3)
    assert cfg.loss_threshold == 0.05


def test_catalog_is_valid():
    assert validate_scenario(builtin_ics_catalog()) == []


def test_catalog_positions_within_floor():
    for d in builtin_ics_catalog().devices:
        assert len(d.position) == 2
        assert all(0.0 <= x <= 30.0 for x in d.position)


def test_bundled_file_matches_catalog():
    assert load_scenario(bundled_scenario_path()) == builtin_ics_catalog()


def test_round_trip_through_file(tmp_path):
    cfg = builtin_ics_catalog()
    path = tmp_path / "scenario.json"
    dump_scenario(cfg, path)
    assert load_scenario(path) == cfg


def test_duplicate_device_id_rejected(tmp_path):
    raw = scenario_to_dict(builtin_ics_catalog())
    raw["devices"][1]["id"] = raw["devices"][0]["id"]
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(raw))
    with pytest.raises(ScenarioError, match="duplicate-id"):
        load_scenario(path)


def test_weights_not_summing_to_one_rejected(tmp_path):
    raw = scenario_to_dict(builtin_ics_catalog())
    raw["trust_weights"]["beta"] = [0.3, 0.3, 0.3]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    with pytest.raises(ScenarioError, match="simplex"):
        load_scenario(path)


def test_unknown_top_level_key_rejected(tmp_path):
    raw = scenario_to_dict(builtin_ics_catalog())
    raw["extra"] = 1
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(raw))
    with pytest.raises(ScenarioError, match="unknown keys"):
        load_scenario(path)


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ScenarioError, match="not valid JSON"):
        load_scenario(path)


def test_negative_reliability_flagged():
    cfg = builtin_ics_catalog()
    bad = replace(cfg.devices[0], reliability={TYPE_FR: -0.1})
    cfg = replace(cfg, devices=(bad,) + cfg.devices[1:])
    violations = validate_scenario(cfg)
    assert any(v.code == "range" and "reliability" in v.path for v in violations)


def test_out_of_range_min_trust_flagged():
    cfg = builtin_ics_catalog()
    task = Task(1, (Subtask(TYPE_FR, 1e6, 0.5, 1.2, 0.0),))
    violations = validate_task(task, cfg)
    assert any(v.code == "range" and "min_trust" in v.path for v in violations)


def test_task_must_be_smaller_than_fleet():
    cfg = builtin_ics_catalog()
    subtasks = tuple(Subtask(TYPE_FR, 1e6, 0.5, 0.2, 0.0) for _ in range(26))
    violations = validate_task(Task(1, subtasks), cfg)
    assert any(v.code == "range" and "subtasks" in v.path for v in violations)


def test_rate_matrix_channel_accepted():
    raw = scenario_to_dict(builtin_ics_catalog())
    n = len(raw["devices"])
    raw["channel"] = {"model": "matrix", "rates_bps": [[8e7] * n for _ in range(n)]}
    cfg = scenario_from_dict(raw)
    assert validate_scenario(cfg) == []


def test_benchmark_task_shapes():
    t3 = benchmark_task()
    assert len(t3.subtasks) == 3
    assert [b.task_type for b in t3.subtasks] == [TYPE_3DM, TYPE_TWC, TYPE_FR]
    assert t3.subtasks[0].size_bits == 5 * BITS_PER_MB
    assert t3.subtasks[1].min_rate_bps == 2 * BITS_PER_MB
    assert all(b.min_trust == 0.2 and b.deadline_s == 0.6 for b in t3.subtasks)
    t4 = benchmark_task(four_subtasks=True)
    assert len(t4.subtasks) == 4
    assert t4.subtasks[3].task_type == TYPE_VT
    assert t4.subtasks[3].size_bits == 10 * BITS_PER_MB


def test_one_to_one_weights_fold_per_type_share():
    w = TrustWeights(beta=(0.2, 0.1, 0.7), delta=(1 / 3,) * 3)
    folded = one_to_one_weights(w)
    assert folded.beta == pytest.approx((0.2, 0.8, 0.0))
    assert folded.delta == w.delta
    again = one_to_one_weights(TrustWeights(beta=(0.1, 0.1, 0.8), delta=(1 / 3,) * 3))
    assert again.beta == pytest.approx((0.1, 0.9, 0.0))

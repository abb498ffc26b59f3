"""Scenario loading, validation diagnostics, and odd device features."""

import math

import pytest

from fieldcalc.errors import FcError, ScenarioError
from fieldcalc.loader import load_core_program
from fieldcalc.netsim import run
from fieldcalc.scenario import decode_value, scenario_from_dict
from fieldcalc.values import Constructor, DeviceId

BASE = {
    "seed": 1,
    "stop": {"rounds": 2},
    "topology": {"type": "grid", "width": 2, "height": 1},
}


def scen(**overrides):
    raw = dict(BASE)
    raw.update(overrides)
    return scenario_from_dict(raw)


class TestValidation:
    def test_seed_is_mandatory(self):
        raw = dict(BASE)
        del raw["seed"]
        with pytest.raises(ScenarioError, match="seed"):
            scenario_from_dict(raw)

    def test_stop_condition_is_mandatory(self):
        raw = dict(BASE)
        del raw["stop"]
        with pytest.raises(ScenarioError, match="stop"):
            scenario_from_dict(raw)

    def test_jitter_below_period(self):
        with pytest.raises(ScenarioError, match="jitter"):
            scen(scheduler={"type": "periodic", "period": 1.0, "jitter": 1.0})

    def test_ttl_positive(self):
        with pytest.raises(ScenarioError, match="ttl"):
            scen(ttl=0)

    def test_loss_probability_range(self):
        with pytest.raises(ScenarioError, match="loss"):
            scen(link={"loss": 1.5})

    def test_sensor_name_must_not_shadow_builtins(self):
        with pytest.raises(ScenarioError, match="collides"):
            scen(sensors={"minHood": {"initial": 1}})

    def test_unknown_scheduler_device(self):
        with pytest.raises(ScenarioError, match="unknown device"):
            scen(scheduler={"type": "periodic", "devices": {9: {}}})

    def test_sensor_changes_strictly_increase(self):
        with pytest.raises(ScenarioError, match="strictly increase"):
            scen(sensors={"s": {"initial": 0,
                                "changes": [{"t": 1.0, "value": 1},
                                            {"t": 1.0, "value": 2}]}})

    def test_defaults(self):
        s = scen()
        assert s.effective_ttl() == 2.5  # 2.5x the 1.0 period
        assert s.location_of(0) == s.location_of(1) == "0"


class TestValueDecoding:
    def test_scalars(self):
        assert decode_value(3) == 3.0
        assert decode_value(True) is True
        assert decode_value(None) is None
        assert decode_value(math.inf) == math.inf

    def test_structured(self):
        assert decode_value({"tuple": [1, 2]}) == Constructor("Tuple", (1.0, 2.0))
        assert decode_value({"vec": [1, 2]}) == Constructor("Vec2", (1.0, 2.0))
        assert decode_value({"con": "HIGH"}) == Constructor("HIGH")
        assert decode_value({"dev": 3}) == DeviceId(3)
        assert decode_value([1, 2]) == Constructor("Tuple", (1.0, 2.0))


def test_clock_skew_shifts_local_times():
    s = scen(clock_skew={1: 0.25}, stop={"rounds": 2})
    trace, es = run(s, load_core_program("1", s))
    times = {(r.device, r.round_index): r.time for r in trace.fires()}
    assert times[(0, 1)] == 0.0 and times[(1, 1)] == 0.25
    assert times[(1, 2)] == 1.25
    es.check_sane()


def test_neighbouring_kind_sensor():
    s = scen(sensors={"weights": {
        "kind": "neighbouring",
        "initial": {0: 5, 1: 7},
    }})
    trace, _ = run(s, load_core_program("sumHoodPlusSelf(weights())", s))
    # each device sees the map restricted to itself and its neighbours
    assert trace.final_values() == {0: 12.0, 1: 12.0}


def test_round_context_rejects_self_export():
    from fieldcalc.evaluator import RoundContext
    from fieldcalc.vtree import ValueTree

    with pytest.raises(FcError):
        RoundContext(self_id=0, time=0.0, sensors={},
                     neighbour_exports={0: (ValueTree(1.0), 0.0)})


def test_horizon_exceeding_trace_length_is_an_error():
    from fieldcalc.corpus import check_entry, load_entry

    with pytest.raises(FcError, match="horizon"):
        check_entry(load_entry("hopcount"), rounds=2)

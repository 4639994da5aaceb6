import json
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from duosec.scenario import (db_to_linear, dbm_to_watts, default_scenario,
                             load_scenario, save_scenario, validate_scenario)


def test_default_scenario_validates(table1):
    validate_scenario(table1)


def test_reference_parameter_values(table1):
    assert table1.n_slots == 20
    assert table1.n_antennas == 4
    assert table1.slot_displacement == pytest.approx(10.0)
    assert table1.p_max["alice"] == pytest.approx(1.0)
    assert table1.p_max["jack"] == pytest.approx(10 ** (25 / 10) / 1000)
    assert table1.noise_power["bob"] == pytest.approx(1e-11)
    assert table1.pathloss_ref == pytest.approx(1e-3)
    assert table1.residual_jam_bob == pytest.approx(0.01)
    assert table1.residual_jam_eve == pytest.approx(1.0)
    assert table1.beampattern_threshold == pytest.approx(1e-5)
    assert len(table1.targets) == 4


def test_db_conversions():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(-30.0) == pytest.approx(1e-3)
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-80.0) == pytest.approx(1e-11)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_db_to_linear_is_multiplicative(a, b):
    assert db_to_linear(a + b) == pytest.approx(db_to_linear(a) * db_to_linear(b))


def test_save_load_round_trip(tmp_path, table1):
    path = tmp_path / "cfg.json"
    save_scenario(table1, path)
    again = load_scenario(path)
    assert again == table1


def test_load_rejects_unknown_key(tmp_path, table1):
    path = tmp_path / "cfg.json"
    save_scenario(table1, path)
    blob = json.loads(path.read_text())
    blob["mystery_knob"] = 3
    path.write_text(json.dumps(blob))
    with pytest.raises((ValueError, KeyError)):
        load_scenario(path)


def test_load_rejects_missing_key(tmp_path, table1):
    path = tmp_path / "cfg.json"
    save_scenario(table1, path)
    blob = json.loads(path.read_text())
    del blob["n_slots"]
    path.write_text(json.dumps(blob))
    with pytest.raises((ValueError, KeyError)):
        load_scenario(path)


@pytest.mark.parametrize("mutate", [
    {"noise_power": {"bob": -1e-11, "eve": 1e-11}},
    {"n_sensing_slots": 7},
    {"n_antennas": 0},
    {"slot_duration": 0.0},
    {"beampattern_threshold": -1.0},
])
def test_validate_rejects_bad_fields(table1, mutate):
    with pytest.raises(ValueError):
        validate_scenario(replace(table1, **mutate))


def test_validate_rejects_unreachable_endpoints(table1):
    bad = replace(table1, uav_final={"alice": (1e4, 0.0), "jack": (100.0, 0.0)})
    with pytest.raises(ValueError):
        validate_scenario(bad)

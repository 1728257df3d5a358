# test_domain.py - Lattice, device profiles and seed streams
import numpy as np
import pytest

from core.domain import (
    CATEGORY_PRESETS,
    DEFAULT_FLEET,
    WORKLOAD_PRESETS,
    DeviceCategory,
    GlobalParams,
    PowerCurve,
    build_fleet,
    enumerate_actions,
    neighbor_values,
    validate_params,
)
from core.errors import KExceedsFleet, OffLattice, ScenarioInvalid
from core.models import ConfigDocument
from core.seeding import NET, POLICY, SeedStreams


def test_reference_point_is_valid():
    p = GlobalParams(8, 10, 20)
    assert validate_params(p, 200) is p


def test_minimal_corner_is_valid():
    assert validate_params(GlobalParams(1, 1, 1), 1) == GlobalParams(1, 1, 1)


def test_off_lattice_names_component():
    with pytest.raises(OffLattice) as err:
        validate_params(GlobalParams(3, 10, 20), 200)
    assert err.value.component == "B"
    assert isinstance(err.value, ValueError)


def test_k_above_fleet():
    with pytest.raises(KExceedsFleet):
        validate_params(GlobalParams(8, 10, 20), 10)


def test_enumerate_actions_order():
    actions = enumerate_actions()
    assert len(actions) == 150
    assert len(set(actions)) == 150
    assert actions[0] == GlobalParams(1, 1, 1)
    assert actions[-1] == GlobalParams(32, 20, 20)


def test_neighbor_values_at_edges():
    assert neighbor_values("B", 1) == (2,)
    assert neighbor_values("B", 8) == (4, 16)
    assert neighbor_values("K", 20) == (15,)


def test_build_fleet_numbers_devices_by_category():
    fleet = build_fleet(DEFAULT_FLEET)
    assert len(fleet) == 200
    assert [d.id for d in fleet] == list(range(200))
    assert [d.category for d in fleet[:30]] == [DeviceCategory.H] * 30
    assert fleet[30].category == DeviceCategory.M
    assert fleet[-1].category == DeviceCategory.L
    assert fleet[0].power_curve.nominal_power == 5.5
    assert fleet[-1].throughput == CATEGORY_PRESETS[DeviceCategory.L].throughput


def test_power_curve_rejects_idle_above_busy():
    with pytest.raises(ValueError):
        PowerCurve(busy_levels=(("nominal", 1.0),), idle_power=2.0)


def test_synthetic_payload_bits():
    assert WORKLOAD_PRESETS["synthetic"].payload_bits == 5440


def test_seed_streams_are_reproducible_and_independent():
    a = SeedStreams(7).generator(NET, 1, 2).random(4)
    b = SeedStreams(7).generator(NET, 1, 2).random(4)
    c = SeedStreams(7).generator(POLICY, 1, 2).random(4)
    d = SeedStreams(8).generator(NET, 1, 2).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_negative_master_seed_rejected():
    with pytest.raises(ValueError):
        SeedStreams(-1)


# Config document defaults

def test_non_iid_default_is_dirichlet_point_one():
    data = ConfigDocument.parse_obj({"scenario": {"data": {"mode": "dirichlet"}}}).scenario.data
    assert data.concentration == 0.1


def test_fixed_without_params_names_the_key():
    with pytest.raises(ScenarioInvalid) as err:
        ConfigDocument().with_strategy("fixed")
    assert "strategy.params" in str(err.value)

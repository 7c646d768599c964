import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from outdated_relay.config import (
    GainConvention,
    SystemConfig,
    correlation_from_doppler,
    db_to_linear,
    derive,
    linear_to_db,
)
from outdated_relay.e2e import derived_for
from outdated_relay.errors import InvalidInputError


def test_midpoint_sigmas_and_threshold():
    cfg = SystemConfig(d1=0.5, pathloss_exp=3.0, rate=1.0)
    d = derived_for(cfg)
    assert d.sigma1 == 8.0 and d.sigma2 == 8.0
    assert d.Psi == 1.0


def test_fixed_gain_constant_single_relay():
    # with one relay the selected-relay means are the hop means
    cfg = SystemConfig(eta1_db=10.0, eta2_db=10.0)
    assert derive(cfg, 1.0, 1.0).C == 21.0
    d = derived_for(cfg)
    assert d.C == pytest.approx(10.0 * (cfg.sigma1 + cfg.sigma2) + 1.0, rel=1e-14)


def test_per_relay_convention_uses_hop_means():
    cfg = SystemConfig(num_relays=3, gain_convention=GainConvention.PER_RELAY_MEANS)
    d = derived_for(cfg)
    assert d.C == pytest.approx(d.eta1 * (cfg.sigma1 + cfg.sigma2) + 1.0)


def test_doppler_mapping():
    assert correlation_from_doppler(0.0) == 1.0
    assert abs(correlation_from_doppler(2.404825558 / (2 * math.pi))) < 1e-9
    # J0(0.2 pi), extended-precision series value
    assert correlation_from_doppler(0.1) == pytest.approx(0.903712642092466, abs=1e-14)


@given(st.floats(-50, 50))
def test_db_roundtrip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-12)


@pytest.mark.parametrize("bad", [
    {"rho1": 1.5}, {"rho2": -0.1}, {"d1": 0.0}, {"d1": 1.0}, {"num_relays": 0},
    {"num_relays": 2.5}, {"pathloss_exp": 0.0}, {"rate": -1.0}, {"eta1_db": math.inf},
    {"noise_power": 0.0}, {"num_relays": True},
])
def test_rejects_invalid_fields(bad):
    with pytest.raises(InvalidInputError):
        SystemConfig(**bad)


def test_dict_roundtrip_and_unknown_fields():
    cfg = SystemConfig(num_relays=3, rho1=0.2, gain_convention="PerRelayMeans")
    assert SystemConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidInputError):
        SystemConfig.from_dict({"relays": 2})


def test_from_powers():
    cfg = SystemConfig.from_powers(10.0, 100.0, 1.0)
    assert cfg.eta1_db == pytest.approx(10.0)
    assert cfg.eta2_db == pytest.approx(20.0)

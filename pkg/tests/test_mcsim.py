import math

import numpy as np
import pytest

from outdated_relay import e2e, mcsim, order_stats
from outdated_relay.config import SystemConfig
from outdated_relay.errors import InvalidInputError


def test_channel_pair_full_correlation_is_identical():
    o, c = mcsim.generate_channel_pair(1.0, 2.0, np.random.default_rng(0), size=1000)
    np.testing.assert_array_equal(o, c)


def test_channel_pair_independent_at_zero_correlation():
    n = 1_000_000
    o, c = mcsim.generate_channel_pair(0.0, 1.0, np.random.default_rng(1), size=n)
    r = np.corrcoef(o, c)[0, 1]
    assert abs(r) < 4 / math.sqrt(n)


def test_channel_pair_power_correlation():
    n = 1_000_000
    o, c = mcsim.generate_channel_pair(0.8, 2.0, np.random.default_rng(2), size=n)
    r = np.corrcoef(o, c)[0, 1]
    # delta-method standard error of a sample correlation: (1 - r^2) / sqrt(n)
    assert abs(r - 0.64) < 4 * (1 - 0.64 ** 2) / math.sqrt(n)
    for v in (o, c):
        assert abs(v.mean() - 2.0) < 4 * 2.0 / math.sqrt(n)


def test_channel_pair_scalar_and_validation():
    o, c = mcsim.generate_channel_pair(0.5, 1.0, np.random.default_rng(3))
    assert isinstance(o, float) and isinstance(c, float)
    with pytest.raises(InvalidInputError):
        mcsim.generate_channel_pair(1.1, 1.0, np.random.default_rng(3))


def test_select_relay_max_min():
    o1 = np.array([0.5, 1.5, 3.0])
    o2 = np.array([2.0, 1.0, 0.2])
    assert mcsim.select_relay(o1, o2) == 1


def test_e2e_snr_arithmetic():
    assert mcsim.e2e_snr(1.0, 1.0, 10.0, 10.0, 21.0) == pytest.approx(100 / 31, rel=1e-15)


def test_run_trial_single_relay_distribution():
    cfg = SystemConfig(num_relays=1)
    derived, model = e2e.build_model(cfg)
    rng = np.random.default_rng(4)
    n = 20_000
    snr = np.array([mcsim.run_trial(cfg, derived, rng) for _ in range(n)])
    for phi in (1.0, 10.0, 50.0):
        p = np.mean(snr < phi)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(e2e.cdf_e2e(model, phi) - p) < 4 * se + 1e-12


def test_outage_edges():
    cfg = SystemConfig(num_relays=2, rho1=0.5, rho2=0.5)
    assert mcsim.estimate_outage(cfg, 0.0, 10_000, seed=1).value == 0.0
    assert mcsim.estimate_outage(cfg, 1e12, 10_000, seed=1).value == pytest.approx(1.0)


def test_outage_matches_analysis_in_exact_regime():
    # single relay, and uncorrelated selection: the analytic CDF is exact
    for cfg in (SystemConfig(num_relays=1, rho1=0.9, rho2=0.9),
                SystemConfig(num_relays=3, rho1=0.0, rho2=0.0)):
        d, model = e2e.build_model(cfg)
        est = mcsim.estimate_outage(cfg, d.Psi, 1_000_000, seed=12)
        assert abs(est.z_score(e2e.outage(model, d.Psi))) < 4


def test_trials_are_validated():
    cfg = SystemConfig()
    with pytest.raises(InvalidInputError):
        mcsim.estimate_outage(cfg, 1.0, 9_999, seed=1)
    with pytest.raises(InvalidInputError):
        mcsim.estimate_outage(cfg, 1.0, 10_000, seed=-1)


def test_results_independent_of_workers():
    cfg = SystemConfig(num_relays=3, rho1=0.9, rho2=0.5)
    a = mcsim.estimate_ser(cfg, e2e.modulation("BPSK"), 200_000, seed=77, workers=1)
    b = mcsim.estimate_ser(cfg, e2e.modulation("BPSK"), 200_000, seed=77, workers=4)
    assert a.value == b.value and a.std_error == b.std_error


def test_streams_are_distinct_and_reproducible():
    cfg = SystemConfig(num_relays=2)
    a = mcsim.estimate_outage(cfg, 1.0, 50_000, seed=5, stream_id=0)
    b = mcsim.estimate_outage(cfg, 1.0, 50_000, seed=5, stream_id=1)
    c = mcsim.estimate_outage(cfg, 1.0, 50_000, seed=5, stream_id=0)
    assert a.value == c.value
    assert a.value != b.value


def test_ser_zero_snr_limits():
    cfg = SystemConfig(eta1_db=-100.0, eta2_db=-100.0)
    bpsk = mcsim.estimate_ser(cfg, e2e.modulation("BPSK"), 10_000, seed=1)
    dbpsk = mcsim.estimate_ser(cfg, e2e.modulation("DBPSK"), 10_000, seed=1)
    assert bpsk.value == pytest.approx(0.5, abs=1e-4)
    assert dbpsk.value == pytest.approx(0.5, abs=1e-4)


def test_dbpsk_is_half_mgf_estimate():
    cfg = SystemConfig(num_relays=2, rho1=0.9, rho2=0.9)
    s = mcsim.estimate_ser(cfg, e2e.modulation("DBPSK"), 100_000, seed=6)
    m = mcsim.estimate_mgf(cfg, 1.0, 100_000, seed=6)
    assert s.value == pytest.approx(0.5 * m.value, rel=1e-12)


def test_symbol_level_agrees_with_semi_analytic():
    cfg = SystemConfig(num_relays=2, rho1=0.9, rho2=0.9, eta1_db=5.0, eta2_db=5.0)
    a = mcsim.estimate_ser(cfg, e2e.modulation("BPSK"), 1_000_000, seed=3)
    b = mcsim.estimate_ser_symbol_level(cfg, 1_000_000, seed=4)
    combined = math.hypot(a.std_error, b.std_error)
    assert abs(a.value - b.value) < 4 * combined


def test_standard_error_shrinks_as_root_n():
    cfg = SystemConfig(num_relays=2, rho1=0.9, rho2=0.9, eta1_db=10.0, eta2_db=10.0)
    ses = [mcsim.estimate_ser(cfg, e2e.modulation("BPSK"), n, seed=2).std_error
           for n in (10_000, 100_000, 1_000_000)]
    for a, b in zip(ses, ses[1:]):
        assert math.sqrt(10) / 1.3 < a / b < math.sqrt(10) * 1.3


def test_selected_gain_means():
    one = mcsim.estimate_eq_gain_stats(SystemConfig(num_relays=1), 200_000, seed=7)
    assert abs(one["outdated1"]["mean"].z_score(8.0)) < 4

    cfg = SystemConfig(num_relays=2, rho1=0.0)
    t = order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, 2)
    x = np.array([2.0, 8.0, 20.0])
    stats = mcsim.estimate_eq_gain_stats(cfg, 400_000, seed=8, abscissae=x)
    # sigma1 = sigma2 = 8 scales the unit-mean value 1.25
    assert abs(stats["outdated1"]["mean"].z_score(8.0 * 1.25)) < 4
    assert abs(stats["outdated1"]["mean"].z_score(order_stats.mean_outdated_eq(1, t))) < 4
    # uncorrelated current gain is a plain exponential
    for xi, est in zip(x, stats["current1"]["cdf"]):
        assert abs(est.z_score(-math.expm1(-xi / 8.0))) < 4


def test_selected_outdated_cdf_brute_force():
    cfg = SystemConfig(num_relays=3, d1=0.5)
    t = order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, 3)
    stats = mcsim.estimate_eq_gain_stats(cfg, 1_000_000, seed=10, abscissae=[8.0])
    assert abs(stats["outdated1"]["cdf"][0].z_score(order_stats.cdf_outdated_eq(1, 8.0, t))) < 4


def test_current_gain_cdf_matches_order_statistics():
    cfg = SystemConfig(num_relays=2, rho1=0.9, rho2=0.9)
    t = order_stats.build_coefficient_table(cfg.sigma1, cfg.sigma2, 2)
    stats = mcsim.estimate_eq_gain_stats(cfg, 1_000_000, seed=11, abscissae=[8.0])
    ref = order_stats.cdf_current_eq(1, 8.0, t, 0.9)
    assert abs(stats["current1"]["cdf"][0].z_score(ref)) < 4


def test_sample_selected_gains_shapes():
    g = mcsim.sample_selected_gains(SystemConfig(num_relays=2), 70_000, seed=1)
    assert all(len(getattr(g, f)) == 70_000
               for f in ("outdated1", "current1", "outdated2", "current2", "snr"))
    assert np.all(g.snr >= 0)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdxtrack.channel import (
    C_LIGHT,
    DB_FLOOR,
    LinkBudget,
    build_si_channel,
    calibrate_si,
    evaluate,
    from_db,
    inr,
    los_channel,
    path_gain,
    sinr_downlink,
    snr_downlink,
    snr_uplink,
    sum_se,
    to_db,
)
from fdxtrack.errors import ConfigError
from fdxtrack.upa import (
    BeamWeights,
    SteeringDirection,
    UpaGeometry,
    array_response,
    matched_filter_beam,
)


def default_budget(**overrides) -> LinkBudget:
    base = dict(
        sat_tx_power_dbm=15.5,
        sat_tx_gain_dbi=30.5,
        sat_rx_gain_dbi=30.5,
        sat_noise_dbm=-93.1,
        ut_tx_power_dbm=36.0,
        ut_noise_dbm=-95.64,
        carrier_hz=20.0e9,
        ut_tx_elem_gain_dbi=29.0 - 10.0 * np.log10(256.0),
        ut_rx_elem_gain_dbi=39.7 - 10.0 * np.log10(256.0),
    )
    base.update(overrides)
    return LinkBudget(**base)


# ---------------------------------------------------------------------------
# path gain

def test_path_gain_600km_20ghz():
    g_db = to_db(path_gain(600.0, 20.0e9))
    # standard FSPL shortcut: 92.45 + 20 log10(f_GHz) + 20 log10(d_km)
    shortcut = -(92.45 + 20.0 * np.log10(20.0) + 20.0 * np.log10(600.0))
    assert g_db == pytest.approx(-174.03, abs=0.01)
    assert g_db == pytest.approx(shortcut, abs=0.005)


def test_path_gain_inverse_square():
    drop = to_db(path_gain(400.0, 12.0e9)) - to_db(path_gain(800.0, 12.0e9))
    assert drop == pytest.approx(20.0 * np.log10(2.0), abs=1e-9)


def test_path_gain_unity_at_lambda_over_4pi():
    # range 1 m and wavelength 4*pi m makes (lambda / 4 pi d) = 1
    carrier = C_LIGHT / (4.0 * np.pi)
    assert to_db(path_gain(1e-3, carrier)) == pytest.approx(0.0, abs=1e-9)


def test_path_gain_rejects_nonpositive_range():
    with pytest.raises(ValueError):
        path_gain(0.0, 20e9)


# ---------------------------------------------------------------------------
# LOS channel

def test_los_norm_identity_random():
    budget = default_budget()
    geom = UpaGeometry(16, 16)
    rng = np.random.default_rng(5)
    for _ in range(1000):
        d = SteeringDirection(rng.uniform(-180, 180), rng.uniform(0, 90))
        r = rng.uniform(400, 2000)
        link = "uplink" if rng.integers(2) else "downlink"
        h = los_channel(geom, d, r, budget, link)
        elem = budget.ut_tx_elem_gain_dbi if link == "uplink" else budget.ut_rx_elem_gain_dbi
        expect = geom.n_elements * path_gain(r, budget.carrier_hz) * from_db(elem)
        assert np.linalg.norm(h.coeffs) ** 2 == pytest.approx(expect, rel=1e-9)


def test_los_matched_filter_recovers_peak():
    budget = default_budget()
    geom = UpaGeometry(16, 16)
    d = SteeringDirection(40.0, 25.0)
    h = los_channel(geom, d, 750.0, budget, "uplink")
    f = matched_filter_beam(geom, d)
    got = abs(np.vdot(f.weights, h.coeffs)) ** 2
    expect = geom.n_elements * path_gain(750.0, budget.carrier_hz) * from_db(budget.ut_tx_elem_gain_dbi)
    assert got == pytest.approx(expect, rel=1e-9)


def test_los_channel_elementwise_oracle():
    budget = default_budget()
    geom = UpaGeometry(3, 5)
    rng = np.random.default_rng(17)
    for _ in range(50):
        az, el = rng.uniform(-180, 180), rng.uniform(0, 90)
        r = rng.uniform(500, 1500)
        h = los_channel(geom, SteeringDirection(az, el), r, budget, "downlink").coeffs
        # independent per-element reconstruction
        lam = C_LIGHT / budget.carrier_hz
        amp = np.sqrt(
            (lam / (4 * np.pi * r * 1e3)) ** 2 * 10 ** (budget.ut_rx_elem_gain_dbi / 10)
        )
        psi = (-2 * np.pi * r * 1e3 / lam) % (2 * np.pi)
        u = np.sin(np.radians(el)) * np.cos(np.radians(az))
        v = np.sin(np.radians(el)) * np.sin(np.radians(az))
        for m in range(3):
            for n in range(5):
                manual = amp * np.exp(1j * (psi + 2 * np.pi * 0.5 * (m * u + n * v)))
                k = m * 5 + n
                assert abs(h[k] - manual) <= 1e-12 * abs(manual)


def test_los_phase_does_not_move_power():
    budget = default_budget()
    geom = UpaGeometry(4, 4)
    d = SteeringDirection(10.0, 50.0)
    f = matched_filter_beam(geom, d)
    powers = set()
    for r in (600.0, 600.001, 612.3456):
        h = los_channel(geom, d, r, budget, "uplink")
        # strip the range-dependent amplitude, keep only phase effects
        p = abs(np.vdot(f.weights, h.coeffs)) ** 2 / (
            path_gain(r, budget.carrier_hz) * from_db(budget.ut_tx_elem_gain_dbi)
        )
        powers.add(round(p, 6))
    assert len(powers) == 1


def test_los_rejects_unknown_link():
    with pytest.raises(ValueError):
        los_channel(UpaGeometry(2, 2), SteeringDirection(0, 10), 600.0, default_budget(), "sideways")


# ---------------------------------------------------------------------------
# SNR expressions

def test_snr_uplink_floor_on_zero_channel():
    budget = default_budget()
    geom = UpaGeometry(16, 16)
    f = matched_filter_beam(geom, SteeringDirection(0, 10))
    h = los_channel(geom, SteeringDirection(0, 10), 600.0, budget, "uplink")
    zero = type(h)(coeffs=np.zeros_like(h.coeffs), link="uplink")
    assert snr_uplink(f, zero, budget) == DB_FLOOR


def test_snr_uplink_linearity_3db():
    budget = default_budget()
    geom = UpaGeometry(8, 8)
    d = SteeringDirection(-25.0, 35.0)
    f = matched_filter_beam(geom, d)
    h = los_channel(geom, d, 800.0, budget, "uplink")
    doubled = type(h)(coeffs=np.sqrt(2.0) * h.coeffs, link="uplink")
    delta = snr_uplink(f, doubled, budget) - snr_uplink(f, h, budget)
    assert delta == pytest.approx(10.0 * np.log10(2.0), abs=1e-9)


def test_snr_uplink_link_budget_chain():
    budget = default_budget()
    geom = UpaGeometry(16, 16)
    d = SteeringDirection(120.0, 30.0)
    f = matched_filter_beam(geom, d)
    h = los_channel(geom, d, 600.0, budget, "uplink")
    got = snr_uplink(f, h, budget)
    # hand chain: P + G_array + G_sat + path gain - noise, all in dB
    expect = 36.0 + 29.0 + 30.5 + to_db(path_gain(600.0, 20e9)) - (-93.1)
    assert got == pytest.approx(expect, abs=1e-9)
    assert got == pytest.approx(14.6, abs=0.1)


def test_snr_downlink_link_budget_chain():
    budget = default_budget()
    geom = UpaGeometry(16, 16)
    d = SteeringDirection(-60.0, 45.0)
    w = matched_filter_beam(geom, d, kind="receive")
    h = los_channel(geom, d, 600.0, budget, "downlink")
    got = snr_downlink(w, h, budget)
    expect = 15.5 + 30.5 + 39.7 + to_db(path_gain(600.0, 20e9)) - (-95.64)
    assert got == pytest.approx(expect, abs=1e-9)
    assert got == pytest.approx(7.3, abs=0.1)


def test_snr_downlink_power_scaling():
    geom = UpaGeometry(8, 8)
    d = SteeringDirection(5.0, 20.0)
    w = matched_filter_beam(geom, d, kind="receive")
    h = los_channel(geom, d, 700.0, default_budget(), "downlink")
    base = snr_downlink(w, h, default_budget())
    boosted = snr_downlink(w, h, default_budget(sat_tx_power_dbm=18.5))
    assert boosted - base == pytest.approx(3.0, abs=1e-9)


# ---------------------------------------------------------------------------
# SI channel

def test_si_channel_deterministic():
    a = build_si_channel("iid-rayleigh", 64, 64, 1e-10, seed=99)
    b = build_si_channel("iid-rayleigh", 64, 64, 1e-10, seed=99)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    c = build_si_channel("iid-rayleigh", 64, 64, 1e-10, seed=100)
    assert not np.array_equal(a.matrix, c.matrix)


def test_si_channel_entry_variance():
    v = 3.7e-11
    si = build_si_channel("iid-rayleigh", 256, 256, v, seed=4)
    mean_power = float(np.mean(np.abs(si.matrix) ** 2))
    assert mean_power == pytest.approx(v, rel=0.05)


def test_si_channel_zero_model():
    si = build_si_channel("zero", 16, 16, 1.0, seed=0)
    assert np.all(si.matrix == 0)


def test_si_channel_unknown_model():
    with pytest.raises(ConfigError):
        build_si_channel("measured", 16, 16, 1.0, seed=0)


def test_si_channel_bad_dims():
    with pytest.raises(ConfigError):
        build_si_channel("iid-rayleigh", 0, 16, 1.0, seed=0)


def test_si_mean_coupling_matches_variance():
    # E|w* H f|^2 = variance for unit-norm beams; average over many draws.
    geom = UpaGeometry(4, 4)
    f = matched_filter_beam(geom, SteeringDirection(30, 40))
    w = matched_filter_beam(geom, SteeringDirection(-50, 20), kind="receive")
    v = 2.5e-3
    acc = 0.0
    n = 10_000
    for seed in range(n):
        si = build_si_channel("iid-rayleigh", 16, 16, v, seed=seed)
        acc += abs(np.vdot(w.weights, si.matrix @ f.weights)) ** 2
    assert acc / n == pytest.approx(v, rel=0.03)


# ---------------------------------------------------------------------------
# INR

def test_inr_floor_on_zero_si():
    budget = default_budget()
    geom = UpaGeometry(16, 16)
    f = matched_filter_beam(geom, SteeringDirection(0, 30))
    w = matched_filter_beam(geom, SteeringDirection(90, 30), kind="receive")
    si = build_si_channel("zero", 256, 256, 0.0, seed=0)
    assert inr(w, si, f, budget) == DB_FLOOR


@given(phase_f=st.floats(0, 2 * np.pi), phase_w=st.floats(0, 2 * np.pi))
@settings(max_examples=30, deadline=None)
def test_inr_phase_rotation_invariant(phase_f, phase_w):
    budget = default_budget()
    geom = UpaGeometry(4, 4)
    f = matched_filter_beam(geom, SteeringDirection(10, 40))
    w = matched_filter_beam(geom, SteeringDirection(-120, 15), kind="receive")
    si = build_si_channel("iid-rayleigh", 16, 16, 1e-9, seed=3)
    base = inr(w, si, f, budget)
    f2 = BeamWeights(np.exp(1j * phase_f) * f.weights, kind="transmit")
    w2 = BeamWeights(np.exp(1j * phase_w) * w.weights, kind="receive")
    assert inr(w2, si, f2, budget) == pytest.approx(base, abs=1e-9)


def test_inr_power_scaling_exact():
    geom = UpaGeometry(8, 8)
    f = matched_filter_beam(geom, SteeringDirection(45, 45))
    w = matched_filter_beam(geom, SteeringDirection(-45, 45), kind="receive")
    si = build_si_channel("iid-rayleigh", 64, 64, 1e-10, seed=12)
    base = inr(w, si, f, default_budget())
    up = inr(w, si, f, default_budget(ut_tx_power_dbm=39.0))
    assert up - base == pytest.approx(3.0, abs=1e-9)


def test_inr_triple_loop_oracle():
    budget = default_budget()
    geom = UpaGeometry(3, 4)
    rng = np.random.default_rng(8)
    for _ in range(20):
        f = matched_filter_beam(geom, SteeringDirection(rng.uniform(-180, 180), rng.uniform(0, 90)))
        w = matched_filter_beam(
            geom, SteeringDirection(rng.uniform(-180, 180), rng.uniform(0, 90)), kind="receive"
        )
        si = build_si_channel("iid-rayleigh", 12, 12, 1e-8, seed=int(rng.integers(1e6)))
        acc = 0.0 + 0.0j
        for i in range(12):
            for j in range(12):
                acc += w.weights[i].conjugate() * si.matrix[i, j] * f.weights[j]
        expect = to_db(from_db(budget.ut_tx_power_dbm) * abs(acc) ** 2 / from_db(budget.ut_noise_dbm))
        assert inr(w, si, f, budget) == pytest.approx(expect, rel=1e-12)


# ---------------------------------------------------------------------------
# calibration

def _sample_pairs(rng, n):
    out = []
    for _ in range(n):
        out.append(
            (
                SteeringDirection(rng.uniform(-180, 180), rng.uniform(0, 55)),
                SteeringDirection(rng.uniform(-180, 180), rng.uniform(0, 55)),
            )
        )
    return out


def test_calibrate_si_hits_target_on_fresh_pairs():
    budget = default_budget()
    geom = UpaGeometry(16, 16)
    pairs = _sample_pairs(np.random.default_rng(21), 500)
    v = calibrate_si(budget, geom, geom, pairs, target_median_inr_db=15.0, seed=77)
    si = build_si_channel("iid-rayleigh", 256, 256, v, seed=77)
    fresh = _sample_pairs(np.random.default_rng(22), 500)
    measured = [
        inr(
            matched_filter_beam(geom, rx, kind="receive"),
            si,
            matched_filter_beam(geom, tx),
            budget,
        )
        for tx, rx in fresh
    ]
    assert 14.5 <= float(np.median(measured)) <= 15.5


def test_calibrate_si_degenerate_target():
    budget = default_budget()
    geom = UpaGeometry(8, 8)
    pairs = _sample_pairs(np.random.default_rng(2), 50)
    v = calibrate_si(budget, geom, geom, pairs, target_median_inr_db=-300.0, seed=1)
    assert v < 1e-30


def test_calibrate_si_linear_in_target():
    budget = default_budget()
    geom = UpaGeometry(8, 8)
    pairs = _sample_pairs(np.random.default_rng(3), 100)
    v1 = calibrate_si(budget, geom, geom, pairs, target_median_inr_db=12.0, seed=5)
    v2 = calibrate_si(budget, geom, geom, pairs, target_median_inr_db=12.0 + 10.0 * np.log10(2.0), seed=5)
    assert v2 == pytest.approx(2.0 * v1, rel=1e-12)


def test_calibrate_si_empty_pairs():
    with pytest.raises(ValueError):
        calibrate_si(default_budget(), UpaGeometry(2, 2), UpaGeometry(2, 2), [], 15.0, 0)


# ---------------------------------------------------------------------------
# SINR and sum SE

def test_sinr_floor_interference_collapses_to_snr():
    assert sinr_downlink(7.3, DB_FLOOR) == pytest.approx(7.3, abs=1e-9)


def test_sinr_at_zero_db_inr():
    assert sinr_downlink(10.0, 0.0) == pytest.approx(10.0 - 10.0 * np.log10(2.0), abs=1e-9)


def test_sum_se_unit_case():
    # linear SNRs 1 and 3 -> log2(2) + log2(4) = 3
    assert sum_se(to_db(1.0), to_db(3.0)) == pytest.approx(3.0, abs=1e-12)


@given(snr=st.floats(-50, 50), inr_db_val=st.floats(-50, 50))
@settings(max_examples=60, deadline=None)
def test_sinr_never_exceeds_snr(snr, inr_db_val):
    assert sinr_downlink(snr, inr_db_val) <= snr + 1e-12


def test_evaluate_bundles_consistent_metrics():
    budget = default_budget()
    geom = UpaGeometry(8, 8)
    d_ul = SteeringDirection(10, 30)
    d_dl = SteeringDirection(-170, 50)
    f = matched_filter_beam(geom, d_ul)
    w = matched_filter_beam(geom, d_dl, kind="receive")
    h_ul = los_channel(geom, d_ul, 600.0, budget, "uplink")
    h_dl = los_channel(geom, d_dl, 900.0, budget, "downlink")
    si = build_si_channel("iid-rayleigh", 64, 64, 1e-10, seed=31)
    m = evaluate(f, w, h_ul, h_dl, si, budget)
    assert m.snr_ul_db == pytest.approx(snr_uplink(f, h_ul, budget))
    assert m.sinr_dl_db <= m.snr_dl_db
    assert m.sum_se_bps_hz == pytest.approx(sum_se(m.snr_ul_db, m.sinr_dl_db))
    assert m.sum_se_bps_hz >= 0.0


def test_budget_validation():
    with pytest.raises(ConfigError):
        default_budget(carrier_hz=0.0)
    with pytest.raises(ConfigError):
        default_budget(ut_noise_dbm=float("nan"))

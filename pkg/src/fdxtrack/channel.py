"""
Link budget, LOS channel vectors, and the self-interference channel.

Everything downstream (tracker, harness) scores beams through the five
quantities computed here: uplink SNR, downlink SNR, self-interference INR,
downlink SINR, and the sum spectral efficiency

    R = log2(1 + SNR_UL) + log2(1 + SINR_DL)        [bps/Hz]

Channels are purely line-of-sight: h = sqrt(path_gain * elem_gain) * e^{j psi}
* a(az, el), so the matched filter recovers N * path_gain * elem_gain of
coupling power.  Path loss is folded into the channel vector norm; transmit
powers and satellite antenna gains stay as explicit linear factors.

The self-interference channel H is a static random matrix (the measurement
campaign that motivated this setup is not reproducible here).  Its per-entry
variance is calibrated so that naive direct-steering beam pairs see a median
INR around +15 dB, which puts the interference squarely above the noise floor
and leaves the large sensitivity to small beam shifts that the tracker
exploits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .upa import BeamWeights, SteeringDirection, UpaGeometry, array_response

C_LIGHT = 299_792_458.0  # m/s

# Linear values below this clamp to the dB floor instead of -inf.
_LIN_FLOOR = 1e-30
DB_FLOOR = -300.0

SI_MODELS = ("iid-rayleigh", "zero")


def to_db(linear) -> np.ndarray | float:
    lin = np.asarray(linear, dtype=float)
    out = np.where(lin < _LIN_FLOOR, DB_FLOOR, 10.0 * np.log10(np.maximum(lin, _LIN_FLOOR)))
    return float(out) if out.ndim == 0 else out


def from_db(db) -> np.ndarray | float:
    out = 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LinkBudget:
    sat_tx_power_dbm: float  # P_tx downlink, dBm
    sat_tx_gain_dbi: float  # satellite antenna gain on the downlink, dBi
    sat_rx_gain_dbi: float  # satellite antenna gain on the uplink, dBi
    sat_noise_dbm: float  # uplink noise power at the satellite, dBm
    ut_tx_power_dbm: float  # P_tx uplink, dBm
    ut_noise_dbm: float  # downlink noise power at the terminal, dBm
    carrier_hz: float
    ut_tx_elem_gain_dbi: float  # per-element gain, transmit array
    ut_rx_elem_gain_dbi: float  # per-element gain, receive array

    def __post_init__(self):
        if self.carrier_hz <= 0:
            raise ConfigError(f"carrier_hz must be positive, got {self.carrier_hz}")
        for name in (
            "sat_tx_power_dbm", "sat_tx_gain_dbi", "sat_rx_gain_dbi", "sat_noise_dbm",
            "ut_tx_power_dbm", "ut_noise_dbm", "ut_tx_elem_gain_dbi", "ut_rx_elem_gain_dbi",
        ):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"link budget field {name} is not finite")

    @property
    def wavelength_m(self) -> float:
        return C_LIGHT / self.carrier_hz


@dataclass(frozen=True)
class ChannelVector:
    coeffs: np.ndarray
    link: str  # "uplink" | "downlink"


@dataclass(frozen=True)
class SiChannel:
    """Static MIMO self-interference channel, N_r x N_t."""

    matrix: np.ndarray
    model_id: str
    seed: int


@dataclass(frozen=True)
class Metrics:
    snr_ul_db: float
    snr_dl_db: float
    inr_db: float
    sinr_dl_db: float
    sum_se_bps_hz: float


def path_gain(range_km: float, carrier_hz: float) -> float:
    """Free-space power gain (lambda / 4 pi d)^2, linear."""
    if range_km <= 0:
        raise ValueError(f"range must be positive, got {range_km} km")
    lam = C_LIGHT / carrier_hz
    return (lam / (4.0 * np.pi * range_km * 1e3)) ** 2


def los_channel(
    geom: UpaGeometry,
    direction: SteeringDirection,
    range_km: float,
    budget: LinkBudget,
    link: str,
) -> ChannelVector:
    """LOS channel vector toward a satellite at (direction, range).

    The vector norm carries path loss and per-element gain; a global phase
    from the propagation delay keeps the coefficients honest but drops out of
    every |.|^2 the metrics take.
    """
    if link == "uplink":
        elem_gain_db = budget.ut_tx_elem_gain_dbi
    elif link == "downlink":
        elem_gain_db = budget.ut_rx_elem_gain_dbi
    else:
        raise ValueError(f"link must be 'uplink' or 'downlink', got {link!r}")
    g = path_gain(range_km, budget.carrier_hz) * from_db(elem_gain_db)
    psi = (-2.0 * np.pi * range_km * 1e3 / budget.wavelength_m) % (2.0 * np.pi)
    coeffs = np.sqrt(g) * np.exp(1j * psi) * array_response(geom, direction)
    return ChannelVector(coeffs=coeffs, link=link)


def snr_uplink(f: BeamWeights, h_ul: ChannelVector, budget: LinkBudget) -> float:
    coupling = abs(np.vdot(f.weights, h_ul.coeffs)) ** 2
    lin = (
        from_db(budget.ut_tx_power_dbm)
        * from_db(budget.sat_rx_gain_dbi)
        * coupling
        / from_db(budget.sat_noise_dbm)
    )
    return to_db(lin)


def snr_downlink(w: BeamWeights, h_dl: ChannelVector, budget: LinkBudget) -> float:
    coupling = abs(np.vdot(w.weights, h_dl.coeffs)) ** 2
    lin = (
        from_db(budget.sat_tx_power_dbm)
        * from_db(budget.sat_tx_gain_dbi)
        * coupling
        / from_db(budget.ut_noise_dbm)
    )
    return to_db(lin)


def build_si_channel(model_id: str, n_r: int, n_t: int, entry_variance: float, seed: int) -> SiChannel:
    """Draw the static N_r x N_t self-interference matrix.

    iid-rayleigh: entries i.i.d. circularly-symmetric complex Gaussian with
    per-entry variance `entry_variance`.  zero: all-zero matrix (useful to pin
    the INR floor in tests).  Deterministic in the seed.
    """
    if n_r <= 0 or n_t <= 0:
        raise ConfigError(f"SI channel dims must be positive, got {n_r}x{n_t}")
    if model_id not in SI_MODELS:
        raise ConfigError(f"unknown self-interference model {model_id!r}; known: {SI_MODELS}")
    if model_id == "iid-rayleigh":
        rng = np.random.default_rng(seed)
        scale = np.sqrt(entry_variance / 2.0)
        mat = scale * (rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t)))
    else:  # "zero"
        mat = np.zeros((n_r, n_t), dtype=complex)
    return SiChannel(matrix=mat, model_id=model_id, seed=seed)


def inr(w: BeamWeights, si: SiChannel, f: BeamWeights, budget: LinkBudget) -> float:
    coupling = abs(np.vdot(w.weights, si.matrix @ f.weights)) ** 2
    lin = from_db(budget.ut_tx_power_dbm) * coupling / from_db(budget.ut_noise_dbm)
    return to_db(lin)


def calibrate_si(
    budget: LinkBudget,
    geom_tx: UpaGeometry,
    geom_rx: UpaGeometry,
    sample_dirs: Sequence[tuple[SteeringDirection, SteeringDirection]],
    target_median_inr_db: float = 15.0,
    seed: int = 0,
) -> float:
    """Entry variance putting the median direct-steering INR at the target.

    Draws a unit-variance matrix, measures |w* H f|^2 over matched-filter
    pairs steered at the sampled direction pairs, and scales: INR is linear in
    the entry variance, so one median measurement pins it.
    """
    if len(sample_dirs) == 0:
        raise ValueError("need at least one sample direction pair")
    unit = build_si_channel("iid-rayleigh", geom_rx.n_elements, geom_tx.n_elements, 1.0, seed)
    couplings = np.empty(len(sample_dirs))
    for i, (tx_dir, rx_dir) in enumerate(sample_dirs):
        f = array_response(geom_tx, tx_dir) / np.sqrt(geom_tx.n_elements)
        w = array_response(geom_rx, rx_dir) / np.sqrt(geom_rx.n_elements)
        couplings[i] = abs(np.vdot(w, unit.matrix @ f)) ** 2
    median_unit = float(np.median(couplings))
    target_lin = from_db(target_median_inr_db)
    p_over_noise = from_db(budget.ut_tx_power_dbm) / from_db(budget.ut_noise_dbm)
    return target_lin / (p_over_noise * median_unit)


def sinr_downlink(snr_dl_db: float, inr_db: float) -> float:
    return to_db(from_db(snr_dl_db) / (1.0 + from_db(inr_db)))


def sum_se(snr_ul_db: float, sinr_dl_db: float) -> float:
    return float(np.log2(1.0 + from_db(snr_ul_db)) + np.log2(1.0 + from_db(sinr_dl_db)))


def evaluate(
    f: BeamWeights,
    w: BeamWeights,
    h_ul: ChannelVector,
    h_dl: ChannelVector,
    si: SiChannel,
    budget: LinkBudget,
) -> Metrics:
    """All five link metrics for one transmit/receive beam pair."""
    s_ul = snr_uplink(f, h_ul, budget)
    s_dl = snr_downlink(w, h_dl, budget)
    i = inr(w, si, f, budget)
    sinr = sinr_downlink(s_dl, i)
    return Metrics(
        snr_ul_db=s_ul,
        snr_dl_db=s_dl,
        inr_db=i,
        sinr_dl_db=sinr,
        sum_se_bps_hz=sum_se(s_ul, sinr),
    )

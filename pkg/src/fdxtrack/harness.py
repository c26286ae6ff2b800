"""
Experiment orchestration: single passes, multi-pair campaigns, exports.

Everything is a pure function of the scenario.  Randomness flows from named
seeds through `derive_seed`, which hashes (seed, *labels) with SHA-256 and
keeps 64 bits; trial i of a campaign uses pair seed
derive_seed(master_seed, "trial", i), and the self-interference matrix of
that trial uses derive_seed(si_seed, "H", pair_seed) when per-trial redraw is
on.  Re-running a scenario (or its manifest) therefore reproduces every CSV
byte for byte.

A campaign runs its trials in a process pool (campaign.workers = 0 picks a
worker count from the CPU count, 1 forces inline execution), pools all
per-timestep samples per scheme with equal weight, and summarizes each metric
as an empirical CDF.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import build_si_channel, calibrate_si, los_channel
from .config import Scenario, scenario_to_dict
from .errors import NoVisiblePairError
from .orbits import (
    Constellation,
    Trajectory,
    direction_tuples,
    export_trajectory_csv,
    generate_constellation,
    select_pair,
)
from .tracker import (
    BeamSchedule,
    CandidateSet,
    PassChannels,
    build_candidates,
    build_grid,
    build_neighborhood,
    export_candidates_json,
    fit_bias,
    measure_candidates,
    select_beams,
    track_conventional,
)
from .upa import SteeringDirection

SCHEME_CONVENTIONAL = "conventional"
METRICS = ("snr_ul_db", "snr_dl_db", "inr_db", "sinr_dl_db", "sum_se")
QUANTILES = (0.01, 0.05, 0.10, 0.50, 0.90)

TRACE_HEADER = [
    "t", "ul_az", "ul_el", "dl_az", "dl_el",
    "snr_ul_db", "snr_dl_db", "inr_db", "sinr_dl_db", "sum_se",
]


def scheme_label(delta_az: int, delta_el: int) -> str:
    return f"proposed_{delta_az}x{delta_el}"


def derive_seed(base_seed: int, *parts) -> int:
    """Stable 64-bit child seed from a base seed and a label path."""
    text = ":".join([str(int(base_seed)), *[str(p) for p in parts]])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class MetricTrace:
    """Per-timestep metrics of one scheme over one pass."""

    scheme: str
    t_s: np.ndarray
    directions_deg: np.ndarray  # chosen (ul_az, ul_el, dl_az, dl_el) per t
    snr_ul_db: np.ndarray
    snr_dl_db: np.ndarray
    inr_db: np.ndarray
    sinr_dl_db: np.ndarray
    sum_se: np.ndarray

    @classmethod
    def from_schedule(cls, sched: BeamSchedule) -> "MetricTrace":
        return cls(
            scheme=sched.scheme,
            t_s=sched.t_s,
            directions_deg=sched.directions_deg,
            snr_ul_db=sched.snr_ul_db,
            snr_dl_db=sched.snr_dl_db,
            inr_db=sched.inr_db,
            sinr_dl_db=sched.sinr_dl_db,
            sum_se=sched.sum_se,
        )

    def metric(self, name: str) -> np.ndarray:
        if name not in METRICS:
            raise KeyError(f"unknown metric {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class CdfSummary:
    """Empirical CDF of one metric for one scheme (pooled samples)."""

    metric: str
    scheme: str
    values: np.ndarray  # sorted
    probs: np.ndarray  # i/n, nondecreasing
    quantiles: dict  # q -> inverse-ECDF value

    @property
    def n_samples(self) -> int:
        return self.values.size

    def fraction_below(self, threshold: float) -> float:
        return float(np.count_nonzero(self.values < threshold) / self.values.size)


def make_cdf(metric: str, scheme: str, samples) -> CdfSummary:
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        raise ValueError(f"no samples for {scheme}/{metric}")
    n = values.size
    probs = np.arange(1, n + 1) / n
    quant = {q: float(values[max(int(np.ceil(q * n)) - 1, 0)]) for q in QUANTILES}
    return CdfSummary(metric=metric, scheme=scheme, values=values, probs=probs, quantiles=quant)


@dataclass(frozen=True)
class PassResult:
    """Everything a single pass produced, for exports beyond the traces."""

    traces: dict  # scheme -> MetricTrace
    ul: Trajectory
    dl: Trajectory
    candidate_sets: dict  # scheme -> CandidateSet (measured)
    si_variance: float


@dataclass(frozen=True)
class CampaignResult:
    summaries: dict  # (scheme, metric) -> CdfSummary
    schemes: tuple
    n_trials: int
    n_success: int
    failures: tuple  # (trial_index, message)
    si_variance: float


def calibration_direction_pairs(scenario: Scenario) -> list:
    """Random matched-pair steering directions inside the visible cone."""
    rng = np.random.default_rng(derive_seed(scenario.si_seed, "si-calibration-dirs"))
    el_max = 90.0 - scenario.mask_el_deg  # broadside-referenced limit
    pairs = []
    for _ in range(scenario.si_calibration_pairs):
        az = rng.uniform(-180.0, 180.0, size=2)
        el = rng.uniform(0.0, el_max, size=2)
        pairs.append(
            (SteeringDirection(az[0], el[0]), SteeringDirection(az[1], el[1]))
        )
    return pairs


def scenario_si_variance(scenario: Scenario) -> float:
    """Per-entry SI variance hitting the scenario's median-INR target."""
    if scenario.si_model == "zero":
        return 0.0
    return calibrate_si(
        scenario.budget,
        scenario.arrays.geom_tx,
        scenario.arrays.geom_rx,
        calibration_direction_pairs(scenario),
        target_median_inr_db=scenario.si_target_median_inr_db,
        seed=derive_seed(scenario.si_seed, "si-calibration-H"),
    )


def build_pass_channels(ul: Trajectory, dl: Trajectory, scenario: Scenario, si) -> PassChannels:
    geom_tx = scenario.arrays.geom_tx
    geom_rx = scenario.arrays.geom_rx
    h_ul = np.stack(
        [
            los_channel(
                geom_tx,
                SteeringDirection(ul.az_deg[i], ul.el_broadside_deg[i]),
                ul.range_km[i],
                scenario.budget,
                "uplink",
            ).coeffs
            for i in range(ul.t_s.size)
        ]
    )
    h_dl = np.stack(
        [
            los_channel(
                geom_rx,
                SteeringDirection(dl.az_deg[i], dl.el_broadside_deg[i]),
                dl.range_km[i],
                scenario.budget,
                "downlink",
            ).coeffs
            for i in range(dl.t_s.size)
        ]
    )
    return PassChannels(
        h_ul=h_ul,
        h_dl=h_dl,
        si=si,
        geom_tx=geom_tx,
        geom_rx=geom_rx,
        quant=scenario.arrays.quant,
    )


def run_pass_detailed(
    scenario: Scenario,
    pair_seed: int,
    si_variance: float | None = None,
    constellation: Constellation | None = None,
) -> PassResult:
    """One satellite pair: conventional plus every configured neighborhood."""
    con = constellation if constellation is not None else generate_constellation(
        scenario.shells, scenario.constellation_seed
    )
    ul, dl, _horizon = select_pair(
        con,
        scenario.site,
        scenario.mask_el_deg,
        scenario.horizon.t_end_s - scenario.horizon.t_start_s,
        seed=pair_seed,
        step_s=scenario.horizon.step_s,
        scan_increment_s=scenario.scan_increment_s,
        scan_limit_s=scenario.scan_limit_s,
    )
    samples = direction_tuples(ul, dl)
    if si_variance is None:
        si_variance = scenario_si_variance(scenario)
    if scenario.si_redraw_per_trial:
        h_seed = derive_seed(scenario.si_seed, "H", pair_seed)
    else:
        h_seed = derive_seed(scenario.si_seed, "H")
    si = build_si_channel(
        scenario.si_model,
        scenario.arrays.geom_rx.n_elements,
        scenario.arrays.geom_tx.n_elements,
        si_variance,
        h_seed,
    )
    channels = build_pass_channels(ul, dl, scenario, si)
    traces = {}
    cand_sets = {}
    conv = track_conventional(samples, scenario.budget, channels, scheme=SCHEME_CONVENTIONAL)
    traces[SCHEME_CONVENTIONAL] = MetricTrace.from_schedule(conv)
    bias = fit_bias(samples, scenario.bias_step_deg)
    grid = build_grid(samples, bias, scenario.resolution_deg)
    for delta_az, delta_el in scenario.neighborhoods:
        label = scheme_label(delta_az, delta_el)
        nbr = build_neighborhood(delta_az, delta_el)
        cands = measure_candidates(
            build_candidates(grid, nbr),
            si,
            scenario.budget,
            channels.geom_tx,
            channels.geom_rx,
            channels.quant,
        )
        sched = select_beams(samples, cands, scenario.budget, channels, scheme=label)
        traces[label] = MetricTrace.from_schedule(sched)
        cand_sets[label] = cands
    return PassResult(traces=traces, ul=ul, dl=dl, candidate_sets=cand_sets, si_variance=si_variance)


def run_pass(scenario: Scenario, pair_seed: int, si_variance: float | None = None) -> dict:
    """Scheme label -> MetricTrace for one pass (see run_pass_detailed)."""
    return run_pass_detailed(scenario, pair_seed, si_variance).traces


def _run_trial(scenario: Scenario, trial_index: int, si_variance: float):
    """Worker body; returns (trial_index, traces | None, error message | None)."""
    pair_seed = derive_seed(scenario.master_seed, "trial", trial_index)
    try:
        traces = run_pass(scenario, pair_seed, si_variance)
        return trial_index, traces, None
    except NoVisiblePairError as exc:
        return trial_index, None, str(exc)


def run_campaign(scenario: Scenario) -> CampaignResult:
    """Run all trials, pool every per-timestep sample, build CDFs per scheme."""
    si_variance = scenario_si_variance(scenario)
    indices = list(range(scenario.trials))
    workers = scenario.workers
    if workers == 0:
        workers = min(os.cpu_count() or 1, scenario.trials)
    if workers <= 1 or scenario.trials == 1:
        results = [_run_trial(scenario, i, si_variance) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(_run_trial, [scenario] * len(indices), indices, [si_variance] * len(indices))
            )
    results.sort(key=lambda r: r[0])
    failures = tuple((i, msg) for i, traces, msg in results if traces is None)
    successes = [(i, traces) for i, traces, msg in results if traces is not None]
    if not successes:
        raise NoVisiblePairError(
            f"all {scenario.trials} trials failed; first failure: {failures[0][1]}"
        )
    schemes = tuple(successes[0][1].keys())
    summaries = {}
    for scheme in schemes:
        for metric in METRICS:
            pooled = np.concatenate([traces[scheme].metric(metric) for _, traces in successes])
            summaries[(scheme, metric)] = make_cdf(metric, scheme, pooled)
    return CampaignResult(
        summaries=summaries,
        schemes=schemes,
        n_trials=scenario.trials,
        n_success=len(successes),
        failures=failures,
        si_variance=si_variance,
    )


# ---------------------------------------------------------------------------
# exports

def _atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def write_manifest(path, scenario: Scenario) -> None:
    payload = {"fdxtrack_version": __version__, "scenario": scenario_to_dict(scenario)}
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def trace_csv_text(trace: MetricTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(TRACE_HEADER)
    for i in range(trace.t_s.size):
        row = [
            trace.t_s[i],
            trace.directions_deg[i, 0],
            trace.directions_deg[i, 1],
            trace.directions_deg[i, 2],
            trace.directions_deg[i, 3],
            trace.snr_ul_db[i],
            trace.snr_dl_db[i],
            trace.inr_db[i],
            trace.sinr_dl_db[i],
            trace.sum_se[i],
        ]
        writer.writerow([f"{v:.6f}" for v in row])
    return buf.getvalue()


def export_traces(traces: dict, out_dir, scenario: Scenario | None = None) -> list:
    """One CSV per scheme under out_dir, plus a manifest when given a scenario."""
    if not traces:
        raise ValueError("no traces to export")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for scheme, trace in traces.items():
        path = os.path.join(out_dir, f"trace_{scheme}.csv")
        _atomic_write(path, trace_csv_text(trace))
        paths.append(path)
    if scenario is not None:
        write_manifest(os.path.join(out_dir, "manifest.json"), scenario)
    return paths


def cdf_csv_text(summaries: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["metric", "scheme", "value_db", "prob"])
    for (scheme, metric), summary in summaries.items():
        for v, p in zip(summary.values, summary.probs):
            writer.writerow([metric, scheme, f"{v:.6f}", f"{p:.6f}"])
    return buf.getvalue()


def export_cdfs(summaries: dict, out_path) -> None:
    if not summaries:
        raise ValueError("no CDF summaries to export")
    _atomic_write(out_path, cdf_csv_text(summaries))


def export_campaign(result: CampaignResult, out_dir, scenario: Scenario) -> None:
    """cdf.csv + summary.json + manifest.json for a finished campaign."""
    os.makedirs(out_dir, exist_ok=True)
    export_cdfs(result.summaries, os.path.join(out_dir, "cdf.csv"))
    summary = {
        "n_trials": result.n_trials,
        "n_success": result.n_success,
        "failures": [[i, msg] for i, msg in result.failures],
        "si_entry_variance": result.si_variance,
        "quantiles": {
            f"{scheme}/{metric}": {f"{q:.2f}": val for q, val in s.quantiles.items()}
            for (scheme, metric), s in result.summaries.items()
        },
    }
    _atomic_write(os.path.join(out_dir, "summary.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_manifest(os.path.join(out_dir, "manifest.json"), scenario)


def export_constellation_csv(path, con: Constellation) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["sat_id", "a_km", "inclination_deg", "raan_deg", "anomaly_deg"])
    for i in range(con.n_sats):
        writer.writerow(
            [
                con.sat_ids[i],
                f"{con.a_km[i]:.6f}",
                f"{np.degrees(con.inclination_rad[i]):.6f}",
                f"{np.degrees(con.raan_rad[i]):.6f}",
                f"{np.degrees(con.anomaly0_rad[i]):.6f}",
            ]
        )
    _atomic_write(path, buf.getvalue())


def read_trace_csv(path) -> dict:
    """Column name -> float array for an exported trace CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"trace file {path} has no data rows")
    return {key: np.array([float(r[key]) for r in rows]) for key in rows[0]}


def cdfs_from_trace_dir(in_dir) -> dict:
    """Pool trace_*.csv files in a directory into per-scheme CDF summaries."""
    names = sorted(n for n in os.listdir(in_dir) if n.startswith("trace_") and n.endswith(".csv"))
    if not names:
        raise ValueError(f"no trace_*.csv files under {in_dir}")
    pooled: dict = {}
    for name in names:
        scheme = name[len("trace_"):-len(".csv")]
        cols = read_trace_csv(os.path.join(in_dir, name))
        for metric in METRICS:
            pooled.setdefault((scheme, metric), []).append(cols[metric])
    return {
        key: make_cdf(key[1], key[0], np.concatenate(chunks))
        for key, chunks in pooled.items()
    }


def export_pass(result: PassResult, out_dir, scenario: Scenario) -> None:
    """Traces, the pair trajectory, candidate tables, manifest — one pass."""
    export_traces(result.traces, out_dir, scenario)
    export_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), result.ul, result.dl)
    for scheme, cands in result.candidate_sets.items():
        export_candidates_json(cands, os.path.join(out_dir, f"candidates_{scheme}.json"))

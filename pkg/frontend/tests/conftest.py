"""Fixture CSVs in the simulator's export formats.

The files are written by hand here on purpose: the CSV layout is the
interface contract between the two packages, and these tests must run
without the simulator installed.
"""
import numpy as np
import pytest

TRACE_HEADER = "t,ul_az,ul_el,dl_az,dl_el,snr_ul_db,snr_dl_db,inr_db,sinr_dl_db,sum_se"


def write_trace(path, t, inr_db, sinr_dl_db, snr_dl_db=None, snr_ul_db=None):
    """A trace CSV with plausible pointing columns and the given metrics."""
    snr_dl_db = snr_dl_db if snr_dl_db is not None else [v + 8.0 for v in sinr_dl_db]
    snr_ul_db = snr_ul_db if snr_ul_db is not None else [14.5] * len(t)
    lines = [TRACE_HEADER]
    for i, ti in enumerate(t):
        se = float(np.log2(1 + 10 ** (snr_ul_db[i] / 10)) + np.log2(1 + 10 ** (sinr_dl_db[i] / 10)))
        lines.append(
            f"{ti:.6f},{-62.1 + i:.6f},{33.0 + 0.5 * i:.6f},{118.4 - i:.6f},{41.2:.6f},"
            f"{snr_ul_db[i]:.6f},{snr_dl_db[i]:.6f},{inr_db[i]:.6f},{sinr_dl_db[i]:.6f},{se:.6f}"
        )
    path.write_text("\r\n".join(lines) + "\r\n")
    return path


@pytest.fixture()
def trace_dir(tmp_path):
    """Two schemes over a 5-sample pass."""
    t = [0.0, 1.0, 2.0, 3.0, 4.0]
    write_trace(
        tmp_path / "trace_conventional.csv",
        t,
        inr_db=[14.2, 15.1, 14.8, 16.0, 15.3],
        sinr_dl_db=[-8.1, -8.9, -8.4, -9.6, -8.8],
    )
    write_trace(
        tmp_path / "trace_proposed_2x2.csv",
        t,
        inr_db=[-11.0, -9.7, -12.3, -10.4, -11.8],
        sinr_dl_db=[4.1, 3.8, 4.4, 4.0, 4.2],
    )
    return tmp_path


def cdf_rows(metric, scheme, values):
    n = len(values)
    return [
        f"{metric},{scheme},{v:.6f},{(i + 1) / n:.6f}"
        for i, v in enumerate(sorted(values))
    ]


@pytest.fixture()
def cdf_dir(tmp_path):
    """A cdf.csv where conventional INR dominates (sits right of) proposed."""
    rows = ["metric,scheme,value_db,prob"]
    rng = np.random.default_rng(8)
    conv_inr = rng.normal(15.0, 2.0, 40)
    prop_inr = rng.normal(-10.0, 3.0, 40)
    for metric, scheme, vals in [
        ("inr_db", "conventional", conv_inr),
        ("inr_db", "proposed_2x2", prop_inr),
        ("snr_dl_db", "conventional", rng.normal(5.5, 1.0, 40)),
        ("snr_dl_db", "proposed_2x2", rng.normal(5.0, 1.0, 40)),
        ("sinr_dl_db", "conventional", rng.normal(-8.5, 2.0, 40)),
        ("sinr_dl_db", "proposed_2x2", rng.normal(4.0, 1.0, 40)),
    ]:
        rows.extend(cdf_rows(metric, scheme, vals))
    (tmp_path / "cdf.csv").write_text("\r\n".join(rows) + "\r\n")
    return tmp_path

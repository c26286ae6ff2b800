import shutil
import subprocess

import numpy as np
import pytest

from fdxplot import cli
from fdxplot.figures import FigureSpec, build_trace_figure
from fdxplot.io import read_trace_csv


def test_version():
    proc = subprocess.run(["fdxplot", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "fdxplot 0.1.0"


def test_trace_command(trace_dir, tmp_path):
    out = tmp_path / "trace.png"
    assert cli.main(["trace", "--in", str(trace_dir), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_trace_metric_selection(trace_dir, tmp_path):
    out = tmp_path / "se.svg"
    rc = cli.main(["trace", "--in", str(trace_dir), "--out", str(out), "--metrics", "sum_se"])
    assert rc == 0
    assert b"<svg" in out.read_bytes()[:200]


def test_cdf_command(cdf_dir, tmp_path):
    out = tmp_path / "cdf.png"
    assert cli.main(["cdf", "--in", str(cdf_dir), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_missing_input_dir(tmp_path, capsys):
    rc = cli.main(["trace", "--in", str(tmp_path / "nope"), "--out", str(tmp_path / "x.png")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_bad_probability_is_input_error(tmp_path, capsys):
    (tmp_path / "cdf.csv").write_text("metric,scheme,value_db,prob\ninr_db,a,1.0,1.5\n")
    rc = cli.main(["cdf", "--in", str(tmp_path), "--out", str(tmp_path / "x.png")])
    assert rc == 2
    assert "outside [0, 1]" in capsys.readouterr().err


def test_unknown_metric(trace_dir, tmp_path, capsys):
    rc = cli.main(
        ["trace", "--in", str(trace_dir), "--out", str(tmp_path / "x.png"), "--metrics", "latency"]
    )
    assert rc == 2
    assert "latency" in capsys.readouterr().err


def test_unwritable_output_is_io_error(trace_dir, tmp_path, capsys):
    rc = cli.main(
        ["trace", "--in", str(trace_dir), "--out", str(tmp_path / "no" / "dir" / "x.png")]
    )
    assert rc == 4
    assert "i/o error" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# end-to-end against the real simulator, when it is installed

SIM_CONFIG = """\
[constellation]
seed = 3
[[constellation.shells]]
altitude_km = 1000.0
inclination_deg = 60.0
plane_count = 8
sats_per_plane = 8
phasing = 1
[pass]
mask_el_deg = 25.0
duration_s = 60.0
step_s = 5.0
[arrays]
tx_rows = 8
tx_cols = 8
rx_rows = 8
rx_cols = 8
[budget]
ut_tx_array_gain_dbi = 23.0
ut_rx_array_gain_dbi = 33.7
[tracker]
neighborhoods = [[1, 1], [2, 2]]
[si]
calibration_pairs = 100
[campaign]
trials = 2
master_seed = 9
workers = 1
"""


@pytest.mark.skipif(shutil.which("fdxtrack") is None, reason="simulator CLI not installed")
def test_against_real_exports(tmp_path):
    cfg = tmp_path / "scenario.toml"
    cfg.write_text(SIM_CONFIG)
    camp = tmp_path / "camp"
    track = tmp_path / "track"
    subprocess.run(
        ["fdxtrack", "campaign", "--config", str(cfg), "--out", str(camp)], check=True
    )
    subprocess.run(
        ["fdxtrack", "track", "--config", str(cfg), "--pair-seed", "1", "--out", str(track)],
        check=True,
    )
    assert cli.main(["trace", "--in", str(track), "--out", str(tmp_path / "t.png")]) == 0
    assert cli.main(["cdf", "--in", str(camp), "--out", str(tmp_path / "c.png")]) == 0
    # plotted points match the exported values byte for byte
    fig = build_trace_figure(FigureSpec(in_dir=str(track), kind="trace", out_path="u.png"))
    cols = read_trace_csv(track / "trace_conventional.csv")
    line = fig.axes[0].lines[0]
    assert np.asarray(line.get_ydata(), dtype=float).tobytes() == cols["inr_db"].tobytes()

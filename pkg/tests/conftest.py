import numpy as np
import pytest

from fdxtrack.config import DEFAULTS, Scenario, _deep_merge, build_scenario

# ---------------------------------------------------------------------------
# acceptance reporting: tests in test_acceptance.py record one line per
# criterion; printed after the run so they survive pytest's capture.

_ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    _ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {status}  {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])


# ---------------------------------------------------------------------------
# shared scenarios

SMALL_OVERRIDES = {
    "constellation": {
        "seed": 3,
        "shells": [
            {
                "altitude_km": 1000.0,
                "inclination_deg": 60.0,
                "plane_count": 8,
                "sats_per_plane": 8,
                "phasing": 1,
            }
        ],
    },
    "pass": {"mask_el_deg": 25.0, "duration_s": 60.0, "step_s": 5.0},
    "arrays": {"tx_rows": 8, "tx_cols": 8, "rx_rows": 8, "rx_cols": 8},
    "budget": {"ut_tx_array_gain_dbi": 23.0, "ut_rx_array_gain_dbi": 33.7},
    "tracker": {"neighborhoods": [[1, 1], [2, 2]]},
    "si": {"calibration_pairs": 100},
    "campaign": {"trials": 3, "workers": 1, "master_seed": 9},
}


def small_scenario_dict(**section_overrides) -> dict:
    cfg = _deep_merge(DEFAULTS, SMALL_OVERRIDES)
    if section_overrides:
        cfg = _deep_merge(cfg, section_overrides)
    return cfg


@pytest.fixture(scope="session")
def small_scenario() -> Scenario:
    """64-satellite shell, 13-sample horizon; one pass runs in ~0.1 s."""
    return build_scenario(small_scenario_dict())


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

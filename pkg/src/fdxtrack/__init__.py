"""Full-duplex beam tracking simulator for LEO ground terminals."""

__version__ = "0.1.0"

from .config import Scenario, load_scenario  # noqa: E402
from .harness import run_campaign, run_pass  # noqa: E402

__all__ = ["Scenario", "load_scenario", "run_campaign", "run_pass", "__version__"]

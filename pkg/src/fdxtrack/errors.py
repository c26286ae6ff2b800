"""Exceptions shared across the simulator; the CLI maps them to exit codes."""


class ConfigError(ValueError):
    """Invalid scenario configuration or parameter out of its stated range."""


class NoVisiblePairError(RuntimeError):
    """No two satellites stayed above the elevation mask long enough in the scanned window."""

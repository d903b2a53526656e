"""Error types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or violated precondition, caught before stepping."""


class SimulationError(RuntimeError):
    """Failure while a computation is underway (solvers, fits, diagnostics)."""

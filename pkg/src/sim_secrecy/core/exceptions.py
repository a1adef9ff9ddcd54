"""Domain-specific exceptions for the SIM secrecy simulator."""


class SimSecrecyError(Exception):
    """Base exception for all simulator and trainer errors."""

    pass


class GeometryError(SimSecrecyError):
    """Raised when points or layouts violate the SIM geometry."""

    def __init__(self, message: str):
        super().__init__(f"Invalid geometry: {message}")


class LayerIndexError(SimSecrecyError):
    """Raised when a metasurface layer index is outside 1..M."""

    def __init__(self, layer: int, layers: int):
        self.layer = layer
        self.layers = layers
        super().__init__(f"Layer index {layer} out of range 1..{layers}")


class DimensionMismatchError(SimSecrecyError):
    """Raised when array shapes do not agree."""

    def __init__(self, what: str, expected, actual):
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"Dimension mismatch for {what}: expected {expected}, got {actual}")


class ConfigError(SimSecrecyError):
    """Raised when an experiment configuration cannot be loaded or validated."""

    def __init__(self, path: str | None, message: str):
        self.path = path
        where = f" ({path})" if path else ""
        super().__init__(f"Configuration error{where}: {message}")


class NumericDivergenceError(SimSecrecyError):
    """Raised when a training loss or parameter becomes non-finite."""

    def __init__(self, episode: int, quantity: str, value: float):
        self.episode = episode
        self.quantity = quantity
        self.value = value
        super().__init__(f"Non-finite {quantity} ({value}) at episode {episode}")


class UnknownStrategyError(SimSecrecyError):
    """Raised for a strategy id outside 1-3 or an unknown evaluation method."""

    def __init__(self, strategy):
        self.strategy = strategy
        super().__init__(f"Unknown strategy or method: {strategy}")


class InvalidSweepAxisError(SimSecrecyError):
    """Raised when a sweep axis or sweep value list is not supported."""

    def __init__(self, axis: str, allowed: list[str]):
        self.axis = axis
        self.allowed = allowed
        super().__init__(f"Invalid sweep axis '{axis}', expected one of: {allowed}")


class EmptyTrajectoryError(SimSecrecyError):
    """Raised when a return or advantage computation receives no steps."""

    def __init__(self, what: str):
        super().__init__(f"Empty trajectory passed to {what}")


class EmptyBufferError(SimSecrecyError):
    """Raised when sampling from an empty replay buffer."""

    def __init__(self):
        super().__init__("Cannot sample from an empty replay buffer")


class CheckpointError(SimSecrecyError):
    """Raised when a checkpoint file is missing, malformed or incompatible."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"Checkpoint error ({path}): {message}")


class RunNotFoundError(SimSecrecyError):
    """Raised when referencing an unknown or pruned experiment run."""

    def __init__(self, run_id: str):
        self.run_id = run_id
        super().__init__(f"Run not found: {run_id}")


class RunLimitError(SimSecrecyError):
    """Raised when the maximum number of concurrent runs is reached."""

    def __init__(self, max_runs: int):
        self.max_runs = max_runs
        super().__init__(f"Maximum concurrent runs ({max_runs}) reached")

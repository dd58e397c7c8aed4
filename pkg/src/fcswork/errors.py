"""Exception types raised by the numerical engine and the CLI."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class DegenerateKernelError(NumericalError):
    """The zero-field generator does not have a one-dimensional kernel."""

    def __init__(self, dimension):
        super().__init__(f"stationary kernel has dimension {dimension}, expected 1")
        self.dimension = dimension


class PreconditionError(ValueError):
    """The inputs do not satisfy the assumptions of the requested check."""


class ConfigError(ValueError):
    """A run configuration is malformed; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field

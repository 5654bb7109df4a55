"""Exception hierarchy. CLI exit codes hang off these classes."""


class MesoxorError(Exception):
    """Base class."""


class ConfigError(MesoxorError, ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class NumericalError(MesoxorError, RuntimeError):
    """A numerical procedure failed (CLI exit code 3)."""


class ReducibleGeneratorError(NumericalError):
    """The generator has more than one closed communicating class."""


class StepRejectedError(NumericalError):
    """The integrator could not keep the distribution valid."""


class NeverSettlesError(NumericalError):
    """The output never entered (or never stayed in) its threshold band."""

    def __init__(self, message: str, gate: str | None = None):
        super().__init__(message if gate is None else f"{gate}: {message}")
        self.gate = gate

class SimulationError(RuntimeError):
    """Base class for failures raised while building or running a simulation."""


class SingularMassMatrix(SimulationError):
    pass


class GimbalLock(SimulationError):
    pass


class NonFiniteState(SimulationError):
    pass


class OpenMesh(ValueError):
    pass


class MeshFormatError(ValueError):
    pass


class DomainError(ValueError):
    pass


class DegenerateTangent(ValueError):
    pass


class DegenerateCommand(ValueError):
    pass


class IllConditioned(ValueError):
    pass


class NonMinimumPhase(ValueError):
    pass


class ValidationError(ValueError):
    """Collects (path, field, reason) issues found while validating an input file."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = [f"{p}: {f}: {r}" for p, f, r in self.issues]
        super().__init__("\n".join(lines) if lines else "validation failed")

"""Exception types raised across the package."""


class CapacityError(ValueError):
    """Requested mode count exceeds the dense-representation cap."""


class ParityError(ValueError):
    """Operator does not have the parity an operation requires."""


class IllConditionedError(ValueError):
    """Coherent-state overlap matrix is too close to singular."""


class AssemblyError(RuntimeError):
    """An assembled operator failed a structural self-check."""


class KrylovError(RuntimeError):
    """Krylov propagation did not reach the requested tolerance."""


class DomainError(ValueError):
    """Vector lies (almost) entirely in the kernel of the operator to invert."""


class WindowError(ValueError):
    """Recurrence window cannot be defined for the given spectrum."""


class ConfigError(ValueError):
    """Experiment configuration is malformed or inconsistent."""

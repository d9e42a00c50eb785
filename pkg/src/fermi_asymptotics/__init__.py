"""Finite-mode laboratory for asymptotic abelianess of interacting Fermi dynamics.

Modules by layer:

``fock``        CAR algebra on ``2**N``-dimensional Fock space
``model``       coherent-state grid, kinetic term and smeared pair interaction
``dynamics``    Heisenberg evolution, quasifree lift, Krylov propagation
``crossed``     full algebra as a crossed product by ``Ad U_0``; cocycle ``V_t``
``doubling``    tracial GNS space as a doubled vacuum; ``J``, ``W``, doubled ``H``
``perturb``     perturbed invariant vectors and the pseudo-inverse
``metrics``     windowed decay, clustering and contrast diagnostics
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    AssemblyError,
    CapacityError,
    ConfigError,
    DomainError,
    IllConditionedError,
    KrylovError,
    ParityError,
    WindowError,
)
from .fock import FockOperator, ModeSystem  # noqa: E402
from .model import Model, build_model  # noqa: E402

__all__ = [
    "AssemblyError",
    "CapacityError",
    "ConfigError",
    "DomainError",
    "FockOperator",
    "IllConditionedError",
    "KrylovError",
    "ModeSystem",
    "Model",
    "ParityError",
    "WindowError",
    "build_model",
    "__version__",
]

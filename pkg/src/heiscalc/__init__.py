"""Calculus on the first Heisenberg group: contact and conformal map
diagnostics, two Schwarzian derivatives, conformal vector fields and their
flows, and a harmonic-map suite, all backed by truncated Taylor jets with an
independent exact polynomial kernel for cross-checks."""

from .errors import (BadPotential, DomainError, EvalError, HeisError,
                     NoConsistentConstant, NotContact, NotHarmonic,
                     NotPositive, OrderError, ParseError, SingularError)

__all__ = [
    "BadPotential", "DomainError", "EvalError", "HeisError",
    "NoConsistentConstant", "NotContact", "NotHarmonic", "NotPositive",
    "OrderError", "ParseError", "SingularError",
]

__version__ = "0.1.0"

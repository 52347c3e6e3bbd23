"""Exception taxonomy shared by every module.

All failures raised on purpose derive from HeisError so callers (and the CLI)
can separate expected mathematical failure modes from bugs.
"""


class HeisError(Exception):
    pass


class DomainError(HeisError):
    """Evaluation left the domain: division by zero, log/sqrt of a
    nonpositive real, inversion at the origin, radial curve off the
    cylinder axis with |z| = 0, and similar."""


class OrderError(HeisError):
    """A jet was asked for more derivative orders than it carries."""


class EvalError(HeisError):
    """An expression tree could not be evaluated (bad node, bad arity)."""


class SingularError(HeisError):
    """A quantity is undefined where its defining denominator vanishes,
    e.g. the classical-type Schwarzian where ZF = 0."""


class NotContact(HeisError):
    """The map fails the contact equations beyond tolerance."""


class NotPositive(HeisError):
    """A quantity required to be positive is not (orientation, Jacobian)."""


class NotHarmonic(HeisError):
    """The potential fails the harmonic equation beyond tolerance."""


class BadPotential(HeisError):
    """A potential does not satisfy the structural assumptions of the
    construction it was passed to (wrong variables, wrong degree)."""


class NoConsistentConstant(HeisError):
    """Exact constant fitting found no single constant matching all data."""


class ParseError(HeisError):
    """The CLI expression/word/grid grammar rejected its input."""

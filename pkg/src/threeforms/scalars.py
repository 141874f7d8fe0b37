"""Scalar backends shared by every algebraic object in the package.

Two backends are supported: exact rationals (``fractions.Fraction``, no
rounding ever) and double-precision floats.  Containers carry a backend tag
and every binary operation checks that the tags agree; mixing backends is an
error, never a silent coercion.
"""

from __future__ import annotations

from fractions import Fraction

RATIONAL = "rational"
FLOAT = "float"

BACKENDS = (RATIONAL, FLOAT)


class BackendMismatchError(TypeError):
    """Raised when rational and float objects meet in one operation."""


def check_backend(tag: str) -> str:
    if tag not in BACKENDS:
        raise ValueError(f"unknown backend {tag!r}; expected one of {BACKENDS}")
    return tag


def same_backend(*tags: str) -> str:
    """Return the common backend tag, raising on any mismatch."""
    first = tags[0]
    for t in tags[1:]:
        if t != first:
            raise BackendMismatchError(f"mixed backends: {first!r} and {t!r}")
    return first


def as_scalar(value, backend: str):
    """Coerce ``value`` into the given backend.

    The rational backend accepts ints, Fractions and 'p/q' strings but
    rejects floats outright (a float fed to an exact computation is almost
    always a bug upstream).
    """
    if backend == RATIONAL:
        if isinstance(value, bool) or isinstance(value, float):
            raise BackendMismatchError(
                f"cannot use {value!r} as an exact rational; pass int, Fraction or 'p/q'"
            )
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        raise BackendMismatchError(f"cannot interpret {value!r} as a rational scalar")
    if backend == FLOAT:
        return float(value)
    raise ValueError(f"unknown backend {backend!r}")


def scalar_zero(backend: str):
    return Fraction(0) if backend == RATIONAL else 0.0


def scalar_one(backend: str):
    return Fraction(1) if backend == RATIONAL else 1.0


def is_exact_zero(value) -> bool:
    """True when the stored coefficient is identically zero.

    Used for pruning; float coefficients are pruned only at exact 0.0 so that
    tiny residuals remain visible to tolerance-based checks.
    """
    return value == 0


def backend_of_value(value) -> str:
    if isinstance(value, Fraction) or isinstance(value, int):
        return RATIONAL
    if isinstance(value, float):
        return FLOAT
    raise BackendMismatchError(f"value {value!r} belongs to no known backend")


def format_scalar(value) -> str | float:
    """JSON representation: rational values as 'p' or 'p/q' strings, floats raw."""
    if isinstance(value, Fraction):
        return str(value)
    return float(value)

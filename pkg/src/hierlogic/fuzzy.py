"""Continuous relaxation of boolean connectives and quantifiers.

Truth values live in [0, 1].  Conjunction is the product t-norm, disjunction
the max t-conorm, and the quantifiers are generalized means with exponent
``q``: ``exists`` is a smooth maximum that sharpens as ``q`` grows, and
``forall`` is its dual.  All connectives accept scalars or NumPy arrays and
broadcast elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FuzzyConfig:
    """Shared relaxation parameters.

    ``q`` is the quantifier exponent (integer >= 1); ``eps`` guards logs and
    fractional powers near zero and must sit in (0, 1e-3).
    """

    q: int = 5
    eps: float = 1e-7

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 1:
            raise ValueError(f"q must be an integer >= 1, got {self.q!r}")
        if not 0.0 < self.eps < 1e-3:
            raise ValueError(f"eps must be in (0, 1e-3), got {self.eps!r}")


def _check_unit(x, name: str) -> None:
    # Debug-build guard: `python -O` strips it from the hot path.
    if __debug__:
        arr = np.asarray(x)
        if arr.size and (np.min(arr) < 0.0 or np.max(arr) > 1.0):
            raise ValueError(f"{name} outside [0, 1]")


def t_norm(a, b):
    """Fuzzy AND: the product of the two truth values."""
    _check_unit(a, "a")
    _check_unit(b, "b")
    return np.multiply(a, b)


def t_conorm(a, b):
    """Fuzzy OR: the maximum of the two truth values."""
    _check_unit(a, "a")
    _check_unit(b, "b")
    return np.maximum(a, b)


def negation(a):
    """Fuzzy NOT: ``1 - a``.  An involution: applying it twice is identity."""
    _check_unit(a, "a")
    return np.subtract(1.0, a)


def implication(a, b):
    """Fuzzy a => b, relaxed as NOT a OR (a AND b) = ``1 - a + a*b``.

    Equals 1 whenever the premise is fully false or the conclusion fully
    true, and collapses to classical implication on {0, 1} inputs.
    """
    _check_unit(a, "a")
    _check_unit(b, "b")
    a = np.asarray(a, dtype=np.float64)
    return 1.0 - a + a * np.asarray(b, dtype=np.float64)


def exists(values, q: int = 5) -> float:
    """Soft EXISTS over a non-empty collection: ``mean(v^q)^(1/q)``.

    A generalized mean between the arithmetic mean (q = 1) and the true
    maximum (q -> inf).  Lies within [min(values), max(values)].
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("exists over an empty collection")
    _check_unit(arr, "values")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return float(np.mean(arr**q) ** (1.0 / q))


def forall(values, q: int = 5) -> float:
    """Soft FORALL, the De Morgan dual of :func:`exists`.

    ``1 - mean((1 - v)^q)^(1/q)``: a soft minimum that approaches the true
    minimum as ``q`` grows.
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("forall over an empty collection")
    _check_unit(arr, "values")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return float(1.0 - np.mean((1.0 - arr) ** q) ** (1.0 / q))

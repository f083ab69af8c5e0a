"""Number helpers shared by every module.

Exact games use ``fractions.Fraction`` throughout; discretised auctions may use
floats.  The helpers here parse and print both without losing information.
"""
from fractions import Fraction
from numbers import Rational

import numpy as np

FLOAT_SLACK = 1e-9   # absorbs roundoff when comparing gains in float mode
TIE_TOL = 1e-12      # relative tolerance for float ties in argmax


def is_exact(x) -> bool:
    return isinstance(x, Rational)


def all_exact(values) -> bool:
    return all(is_exact(v) for v in values)


def parse_number(x):
    """Accept ints, floats, "num/den" strings and decimal strings."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        s = x.strip()
        try:
            return Fraction(s)
        except ValueError:
            return float(s)
    raise TypeError(f"cannot parse number from {x!r}")


def format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, Rational):
        return str(int(x))
    return repr(float(x))


def as_float(x) -> float:
    return float(x)


def within(gain, epsilon) -> bool:
    """gain <= epsilon, exactly when both are rational, else with float slack."""
    if is_exact(gain) and is_exact(epsilon):
        return gain <= epsilon
    return float(gain) <= float(epsilon) + FLOAT_SLACK


def close(a, b, tol=0) -> bool:
    if is_exact(a) and is_exact(b) and is_exact(tol):
        return abs(a - b) <= tol
    return abs(float(a) - float(b)) <= float(tol) + FLOAT_SLACK


def zeros(size, exact):
    if exact:
        out = np.empty(size, dtype=object)
        out[:] = Fraction(0)
        return out
    return np.zeros(size)


def as_vector(seq, exact):
    if exact:
        out = np.empty(len(seq), dtype=object)
        out[:] = [Fraction(v) for v in seq]
        return out
    return np.asarray([float(v) for v in seq], dtype=float)


def first_argmax(values, exact):
    """Index of the first maximiser; float ties within TIE_TOL count as equal."""
    best = max(values)
    if exact:
        for k, v in enumerate(values):
            if v == best:
                return k
    tol = TIE_TOL * (1.0 + abs(float(best)))
    for k, v in enumerate(values):
        if float(v) >= float(best) - tol:
            return k
    return 0

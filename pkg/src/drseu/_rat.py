"""Exact rational arithmetic helpers shared across the package.

Everything user-facing is converted to rationals once, at the boundary;
all interior computation is exact. gmpy2 is used when importable, the
stdlib Fraction otherwise.
"""
from __future__ import annotations

import numbers
from fractions import Fraction
from math import isqrt
from typing import Iterable, Optional, Sequence, Tuple, Union

try:  # pragma: no cover - exercised implicitly by whichever env runs
    from gmpy2 import mpq as _mpq

    def _make(n: int, d: int = 1):
        return _mpq(n, d)

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    _make = Fraction
    HAVE_GMPY2 = False

RatLike = Union[int, float, str, numbers.Rational]

ZERO = _make(0)
ONE = _make(1)


def rat(x: RatLike):
    """Convert ``x`` to an exact rational.

    Accepts ints, rationals, floats (converted exactly, not via repr),
    and strings in either ``"p/q"`` or decimal form.
    """
    if isinstance(x, bool):
        raise TypeError("bool is not a rational quantity")
    if isinstance(x, int):
        return _make(x)
    if isinstance(x, float):
        f = Fraction(x)  # exact binary expansion
        return _make(f.numerator, f.denominator)
    if isinstance(x, str):
        try:
            f = Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational from {x!r}") from exc
        return _make(f.numerator, f.denominator)
    if isinstance(x, numbers.Rational):
        return _make(x.numerator, x.denominator)
    if HAVE_GMPY2 and type(x) is type(ZERO):  # pragma: no cover
        return x
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def as_pair(r) -> Tuple[int, int]:
    return int(r.numerator), int(r.denominator)


def rat_str(r) -> str:
    """Render a rational as ``p/q``, or a bare integer when q == 1."""
    n, d = as_pair(r)
    return str(n) if d == 1 else f"{n}/{d}"


def rat_float(r) -> float:
    n, d = as_pair(r)
    return n / d


def clamp01(r):
    if r < ZERO:
        return ZERO
    if r > ONE:
        return ONE
    return r


def sqrt_lower(x, digits: int = 20):
    """Rational lower bound for sqrt(x) accurate to ~``digits`` decimals.

    ``x`` must be a nonnegative rational. The bound is certified:
    the returned r satisfies r*r <= x < (r + 10**-digits)**2.
    """
    x = rat(x)
    if x < ZERO:
        raise ValueError("sqrt of a negative rational")
    if x == ZERO:
        return ZERO
    n, d = as_pair(x)
    scale = 10 ** digits
    root = isqrt(n * d * scale * scale)
    return rat(root) / rat(d * scale)


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError("dot: length mismatch")
    total = ZERO
    for a, b in zip(u, v):
        total += a * b
    return total


def convex_combination(
    vectors: Sequence[Sequence], target: Sequence
) -> Optional[Tuple]:
    """Exact convex-combination solve.

    Returns rational weights lam with lam >= 0, sum(lam) == 1 and
    sum(lam_i * vectors[i]) == target, or None when infeasible. Uses a
    phase-1 simplex with Bland's rule over exact rationals, so the
    answer is a certificate, not an approximation.
    """
    n = len(vectors)
    if n == 0:
        return None
    dim = len(target)
    for v in vectors:
        if len(v) != dim:
            raise ValueError("convex_combination: dimension mismatch")

    # Equality constraints: each coordinate row, plus the sum-to-one row.
    rows = []
    rhs = []
    for j in range(dim):
        rows.append([rat(v[j]) for v in vectors])
        rhs.append(rat(target[j]))
    rows.append([ONE] * n)
    rhs.append(ONE)

    m = len(rows)
    for i in range(m):
        if rhs[i] < ZERO:
            rows[i] = [-a for a in rows[i]]
            rhs[i] = -rhs[i]

    # Tableau with one artificial variable per constraint.
    width = n + m
    tab = []
    for i in range(m):
        row = rows[i] + [ZERO] * m + [rhs[i]]
        row[n + i] = ONE
        tab.append(row)
    basis = [n + i for i in range(m)]

    # Phase-1 objective row: minimize the sum of artificials.
    obj = [ZERO] * (width + 1)
    for i in range(m):
        for j in range(width + 1):
            obj[j] -= tab[i][j]

    while True:
        enter = -1
        for j in range(width):
            if obj[j] < ZERO:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > ZERO:
                ratio = tab[i][width] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return None  # unbounded; cannot happen for a feasibility LP
        piv = tab[leave][enter]
        tab[leave] = [a / piv for a in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != ZERO:
                factor = tab[i][enter]
                tab[i] = [a - factor * b for a, b in zip(tab[i], tab[leave])]
        if obj[enter] != ZERO:
            factor = obj[enter]
            obj = [a - factor * b for a, b in zip(obj, tab[leave])]
        basis[leave] = enter

    if obj[width] != ZERO:
        return None

    lam = [ZERO] * n
    for i in range(m):
        if basis[i] < n:
            lam[basis[i]] = tab[i][width]
        elif tab[i][width] != ZERO:
            return None  # artificial stuck at a positive level
    return tuple(lam)


def rat_sum(items: Iterable):
    total = ZERO
    for x in items:
        total += x
    return total

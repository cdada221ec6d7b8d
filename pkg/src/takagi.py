"""
Takagi Module

Evaluates Takagi's function T(x) = sum_{n>=1} 2^-n phi^(n)(x), phi the tent map:
exactly at dyadic points (popcount formula), exactly at rational points (summing
the eventually periodic tent orbit), and as a rigorous dyadic enclosure at points
known only through their binary expansion.
"""

from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict

from .errors import DomainError
from .exact_core import Dyadic, Interval, popcount_prefix_sum
from .expansion import BinaryExpansion


class OrbitTrace(BaseModel):
    """Tent-map orbit x, phi(x), ... up to the first repeated point"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: List[Fraction]
    preperiod_len: int
    cycle_len: int


def _check_unit(x: Fraction) -> Fraction:
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise DomainError(f"{x} is outside [0, 1]")
    return x


def tent_map(x: Fraction) -> Fraction:
    return 2 * x if x <= Fraction(1, 2) else 2 - 2 * x


def tent_iterate(x: Fraction, n: int) -> Fraction:
    """phi^(n)(x), exact; phi^(0) is the identity."""
    x = _check_unit(x)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    for _ in range(n):
        x = tent_map(x)
    return x


def _integer_orbit(a: int, q: int) -> Tuple[List[int], int]:
    """Orbit of a/q as numerators over q, up to the first repeat; returns (ys, preperiod)."""
    seen = {}
    ys: List[int] = []
    y = a
    while y not in seen:
        seen[y] = len(ys)
        ys.append(y)
        y = 2 * y if 2 * y <= q else 2 * q - 2 * y
    return ys, seen[y]


def tent_orbit(x: Fraction) -> OrbitTrace:
    """Cycle-detected tent orbit of a rational x in [0, 1]."""
    x = _check_unit(x)
    q = x.denominator
    ys, pre = _integer_orbit(x.numerator, q)
    return OrbitTrace(
        points=[Fraction(y, q) for y in ys],
        preperiod_len=pre,
        cycle_len=len(ys) - pre,
    )


def takagi_dyadic(k: int, m: int) -> Dyadic:
    """
    Exact T(k/2^m) = 2^-m * sum_{j<k} (m - 2 s_j).

    Args:
        k: numerator, 0 <= k <= 2^m
        m: exponent, >= 0

    Returns:
        T(k/2^m) as a canonical Dyadic
    """
    if m < 0 or not 0 <= k <= (1 << m):
        raise DomainError(f"k={k} is outside [0, 2^{m}]")
    return Dyadic(k * m - 2 * popcount_prefix_sum(k), m)


def takagi_of_dyadic(y: Dyadic) -> Dyadic:
    if y < 0 or 1 < y:
        raise DomainError(f"{y} is outside [0, 1]")
    return takagi_dyadic(y.num, y.exp)


@lru_cache(maxsize=8192)
def takagi_rational(x: Fraction) -> Fraction:
    """
    Exact T(x) for rational x in [0, 1].

    The orbit of p/q has at most q + 1 distinct points, so it becomes periodic;
    the preperiodic terms are summed directly and the cycle as a geometric series.
    """
    x = _check_unit(x)
    if x == 0 or x == 1:
        return Fraction(0)
    q = x.denominator
    ys, pre = _integer_orbit(x.numerator, q)
    cycle = len(ys) - pre

    def y_at(n: int) -> int:
        return ys[n] if n < len(ys) else ys[pre + (n - pre) % cycle]

    start = max(pre, 1)
    head = 0
    for n in range(1, start):
        head = 2 * head + y_at(n)
    loop = 0
    for n in range(start, start + cycle):
        loop = 2 * loop + y_at(n)
    # head / 2^(start-1) + 2 * loop / (2^start * (2^cycle - 1)), all over q
    period = (1 << cycle) - 1
    logger.debug(f"T({x}): preperiod {pre}, cycle {cycle}")
    return Fraction(2 * head * period + 2 * loop, (1 << start) * period * q)


def takagi_partial(y: Dyadic, n_terms: int) -> Dyadic:
    """
    Exact partial sum sum_{n=1}^{N} 2^-n phi^(n)(y) at a dyadic y in [0, 1].

    Uses T(y) = partial + 2^-N T(phi^(N)(y)), and phi^(N)(k/2^M) = 2 dist(2^(N-1) k / 2^M, Z).
    """
    if n_terms < 1:
        raise ValueError(f"need at least one term, got {n_terms}")
    full = takagi_of_dyadic(y)
    m = y.exp
    if n_terms - 1 >= m:
        return full
    r = (y.num << (n_terms - 1)) % (1 << m)
    image = 2 * min(r, (1 << m) - r)
    return full - takagi_dyadic(image, m).shift(-n_terms)


def takagi_enclosure(x: BinaryExpansion, n_terms: int, depth: int = None) -> Interval:
    """
    Rigorous enclosure of T(x) from the dyadic truncation x_M.

    For M >= N the partial sum S_N has no breakpoint inside [x_M, x_M + 2^-M], so S_N(x)
    lies between its exact values at the two endpoints, which differ by at most N 2^-M.
    Shallower depths fall back to the slope bound |S_N(x) - S_N(x_M)| <= N 2^-M on both
    sides. The remaining terms lie in [0, 2^-N].

    Args:
        x: the point
        n_terms: N, number of series terms evaluated
        depth: M, truncation depth of x (default 2N)

    Returns:
        Interval containing T(x), width <= N 2^-M + 2^-N when M >= N (exact point for short
        dyadics)
    """
    if n_terms < 1:
        raise ValueError(f"N must be >= 1, got {n_terms}")
    depth = depth if depth is not None else 2 * n_terms
    end = x.terminates_at()
    if end is not None and end <= depth:
        return Interval.point(takagi_of_dyadic(x.truncation(max(end, 1))))

    x_m = x.truncation(depth)
    logger.debug(f"Enclosing T({x.describe()}) with N={n_terms}, M={depth}")
    left = takagi_partial(x_m, n_terms)
    if depth >= n_terms:
        right = takagi_partial(x_m + Dyadic.pow2(-depth), n_terms)
        partial = Interval(min(left, right), max(left, right))
    else:
        radius = Dyadic(n_terms, depth)
        partial = Interval(left - radius, left + radius)
    return partial + Interval(Dyadic(0), Dyadic.pow2(-n_terms))

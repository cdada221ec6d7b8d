"""
Kono Module

Splits T(x+h) - T(x) into Sigma1 + Sigma2 + Sigma3 (agreement prefix, carry
interaction, tail), checks the split against an independent evaluation of the
difference, and provides the key inequality for the carry factor and the
maximizer m* of f(m) = (1 - 2^-m)(c - m).
"""

from fractions import Fraction
from typing import List, Optional, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict

from .errors import DomainError, ExpansionOverflowError, InconsistentCarryError
from .exact_core import Dyadic, Interval
from .expansion import BinaryExpansion, add_pow2, deficiency, expansion_of_rational
from .takagi import takagi_rational

DEFAULT_DEPTH_FLOOR = 80


class KonoSplit(BaseModel):
    """One evaluated decomposition T(x+h) - T(x) = Sigma1 + Sigma2 + Sigma3"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    h: Dyadic
    p: int
    k0: int
    depth: int
    middle: int
    sigma1: Dyadic
    sigma2: Interval
    sigma3: Interval
    total: Interval
    reference_delta: Optional[Fraction] = None

    def identity_holds(self) -> Optional[bool]:
        if self.reference_delta is None:
            return None
        return self.total.contains(self.reference_delta)


class MaximizerReport(BaseModel):
    """Largest maximizer m* of f(m) = (1 - 2^-m)(c - m) over m >= 0"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    c: int
    mstar: int
    fvalues: List[Fraction]

    def bracket_holds(self) -> bool:
        """log2 c - 2 < m* <= log2 c + 1, checked in integers."""
        upper = self.mstar < 1 or (1 << (self.mstar - 1)) <= self.c
        lower = self.c < (1 << (self.mstar + 2))
        return upper and lower


def default_depth(p: int) -> int:
    return max(DEFAULT_DEPTH_FLOOR, 2 * p)


def step_exponent(h: Dyadic) -> int:
    """The p with 2^-p-1 < h <= 2^-p."""
    if not (Dyadic(0) < h <= Dyadic.pow2(-1)):
        raise DomainError(f"step {h} must satisfy 0 < h <= 1/2")
    p = 1
    while h <= Dyadic.pow2(-p - 1):
        p += 1
    return p


def _fractional_shift(value: Fraction, p: int) -> Fraction:
    """frac(2^p value): the point whose digits are eps_{p+1} eps_{p+2} ..."""
    scaled = value * (1 << p)
    return scaled - (scaled.numerator // scaled.denominator)


def _agreement_length(x: BinaryExpansion, shifted: BinaryExpansion, p: int) -> int:
    for k in range(1, p + 1):
        if x.digit(k) != shifted.digit(k):
            return k - 1
    return p


def _carry_factor_truncated(x: BinaryExpansion, shifted: BinaryExpansion, p: int, depth: int) -> Interval:
    total = Dyadic(0)
    for k in range(p + 1, depth + 1):
        total += Dyadic(1 - x.digit(k) - shifted.digit(k), k)
    return Interval.around(total, Dyadic.pow2(-depth))


def _carry_factor_exact(x_value: Fraction, shifted_value: Fraction, p: int) -> Fraction:
    # sum_{k>p} 2^-k (1 - eps_k - eps'_k) = 2^-p (1 - frac(2^p x) - frac(2^p x'))
    return Fraction(1, 1 << p) * (1 - _fractional_shift(x_value, p) - _fractional_shift(shifted_value, p))


def _shifted_point(x: BinaryExpansion, p: int, h: Optional[Dyadic]) -> Tuple[BinaryExpansion, int]:
    if h is None or h == Dyadic.pow2(-p):
        return add_pow2(x, p)
    value = x.rational_value()
    if value is None:
        raise DomainError("steps other than 2^-p need a rational point")
    target = value + h.to_fraction()
    if target >= 1:
        raise ExpansionOverflowError(f"{x.describe()} + {h} >= 1")
    shifted = expansion_of_rational(target, x.bit_budget)
    return shifted, _agreement_length(x, shifted, p)


def middle_sum(x: BinaryExpansion, k0: int, p: int) -> int:
    """
    sum_{n=k0+1}^{p} X_n(x) by direct summation.

    Raises:
        InconsistentCarryError: (k0, p) is not the carry pattern of x + 2^-p,
            i.e. eps_{k0+1} != 0 or some eps_k != 1 for k0+2 <= k <= p
    """
    if not 0 <= k0 < p:
        raise InconsistentCarryError(f"need 0 <= k0 < p, got k0={k0}, p={p}")
    if x.digit(k0 + 1) != 0 or any(x.digit(k) != 1 for k in range(k0 + 2, p + 1)):
        raise InconsistentCarryError(f"k0={k0}, p={p} is not a carry pattern of {x.describe()}")
    total = sum(x.rademacher(n) for n in range(k0 + 1, p + 1))
    if total != -(p - k0 - 2):
        raise InconsistentCarryError(f"middle sum {total} != {-(p - k0 - 2)}")
    return total


def sigma2_factor(x: BinaryExpansion, p: int, depth: Optional[int] = None,
                  h: Optional[Dyadic] = None) -> Interval:
    """
    The carry factor sum_{k>p} 2^-k (1 - eps_k - eps'_k) of Sigma2.

    Exact (a point, or a 2^-K enclosure of an exact rational) for rational x;
    truncated at depth K with tail radius 2^-K otherwise.
    """
    depth = depth or default_depth(p)
    shifted, _ = _shifted_point(x, p, h)
    return _carry_factor(x, shifted, p, depth)


def _tent_term(value: Fraction, n: int) -> Fraction:
    """2^-n phi^(n)(value), with phi^(n)(t) = 2 dist(2^(n-1) t, Z)."""
    scaled = value * (1 << (n - 1))
    frac = scaled - (scaled.numerator // scaled.denominator)
    return 2 * min(frac, 1 - frac) / (1 << n)


def _term_differences(x_value: Fraction, shifted_value: Fraction, k0: int, p: int) -> Fraction:
    """sum_{n=k0+1}^{p} 2^-n [phi^(n)(x') - phi^(n)(x)]: Sigma2 for a general step."""
    return sum(
        (_tent_term(shifted_value, n) - _tent_term(x_value, n) for n in range(k0 + 1, p + 1)),
        Fraction(0),
    )


def _carry_factor(x: BinaryExpansion, shifted: BinaryExpansion, p: int, depth: int) -> Interval:
    x_value, shifted_value = x.rational_value(), shifted.rational_value()
    if x_value is not None and shifted_value is not None:
        return Interval.enclose(_carry_factor_exact(x_value, shifted_value, p), depth)
    return _carry_factor_truncated(x, shifted, p, depth)


def sigma3_double_sum(x: BinaryExpansion, shifted: BinaryExpansion, p: int, depth: int) -> Interval:
    """
    Sigma3 = 1/2 sum_{n>p} sum_{k>n} [X_n X_k - X'_n X'_k] 2^-k by direct truncation.

    Pairs with n, k <= K are summed exactly; the rest contribute at most (K - p + 1) 2^-K.
    """
    signs = [x.rademacher(k) for k in range(p + 1, depth + 1)]
    signs2 = [shifted.rademacher(k) for k in range(p + 1, depth + 1)]
    total = Dyadic(0)
    for i in range(len(signs)):
        for j in range(i + 1, len(signs)):
            term = signs[i] * signs[j] - signs2[i] * signs2[j]
            if term:
                total += Dyadic(term, p + 1 + j + 1)
    return Interval.around(total, Dyadic(depth - p + 1, depth))


def _sigma3(x: BinaryExpansion, shifted: BinaryExpansion, p: int, depth: int) -> Interval:
    x_value, shifted_value = x.rational_value(), shifted.rational_value()
    if x_value is not None and shifted_value is not None:
        # the n > p block is 2^-p [T(frac(2^p x')) - T(frac(2^p x))]
        exact = Fraction(1, 1 << p) * (
            takagi_rational(_fractional_shift(shifted_value, p))
            - takagi_rational(_fractional_shift(x_value, p))
        )
        return Interval.enclose(exact, depth)
    # x + 2^-p leaves every digit after p unchanged, so each bracket vanishes
    return Interval.point(Dyadic(0))


def kono_split(x: BinaryExpansion, p: Optional[int] = None, depth: Optional[int] = None,
               h: Optional[Dyadic] = None) -> KonoSplit:
    """
    Evaluate the decomposition of T(x+h) - T(x).

    Args:
        x: the point (rational backends give an exact reference difference)
        p: scale index; h defaults to 2^-p
        depth: truncation depth K (default max(80, 2p))
        h: optional dyadic step with 2^-p-1 < h <= 2^-p (rational x only)

    Returns:
        KonoSplit with exact Sigma1, enclosed Sigma2 and Sigma3, their sum, and
        T(x+h) - T(x) when x is rational

    Raises:
        ExpansionOverflowError: x + h >= 1
        AllOnesPrefixError: h = 2^-p and the first p digits are all 1
    """
    if h is not None:
        h = Dyadic.coerce(h)
        p = step_exponent(h)
    if p is None or p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    step = h if h is not None else Dyadic.pow2(-p)
    depth = depth or default_depth(p)

    shifted, k0 = _shifted_point(x, p, h)
    sigma1 = step * deficiency(x, k0)
    middle = sum(x.rademacher(n) for n in range(k0 + 1, p + 1))
    x_value, shifted_value = x.rational_value(), shifted.rational_value()
    if x_value is None or shifted_value is None:
        sigma2 = _carry_factor_truncated(x, shifted, p, depth).scale(middle)
    elif step == Dyadic.pow2(-p):
        sigma2 = Interval.enclose(_carry_factor_exact(x_value, shifted_value, p) * middle, depth)
    else:
        sigma2 = Interval.enclose(_term_differences(x_value, shifted_value, k0, p), depth)
    sigma3 = _sigma3(x, shifted, p, depth)
    total = sigma2 + sigma3 + sigma1

    reference = None
    if x_value is not None:
        reference = takagi_rational(shifted_value) - takagi_rational(x_value)
    split = KonoSplit(
        h=step,
        p=p,
        k0=k0,
        depth=depth,
        middle=middle,
        sigma1=sigma1,
        sigma2=sigma2,
        sigma3=sigma3,
        total=total,
        reference_delta=reference,
    )
    if reference is not None and not split.identity_holds():
        logger.warning(f"Decomposition misses reference at {x.describe()}, p={p}")
    return split


def maximize_f(c: int) -> MaximizerReport:
    """
    Largest maximizer of f(m) = (1 - 2^-m)(c - m) over m = 0, 1, 2, ...

    f(m+1) >= f(m) iff 2^(m+1) + m <= c + 1, and the increments decrease strictly,
    so the scan from m = 0 stops at the first strict decrease (always by m = c).
    """
    if c < 1:
        raise DomainError(f"c must be >= 1, got {c}")
    mstar = 0
    while mstar < c and (1 << (mstar + 1)) + mstar <= c + 1:
        mstar += 1

    def f(m: int) -> Fraction:
        return (1 - Fraction(1, 1 << m)) * (c - m)

    sample_end = min(c, mstar + 3)
    return MaximizerReport(c=c, mstar=mstar, fvalues=[f(m) for m in range(sample_end + 1)])


def adversarial_step(zeros: Tuple[int, ...], n: int) -> Tuple[int, int]:
    """
    The step exponent p = b_{n+1} - m* with m* = maximize_f(b_{n+1} - b_n).mstar.

    Args:
        zeros: at least n+1 zero positions b_1 < b_2 < ...
        n: index, >= 1

    Returns:
        (p, m*)
    """
    c = zeros[n] - zeros[n - 1]
    mstar = maximize_f(c).mstar
    return zeros[n] - mstar, mstar

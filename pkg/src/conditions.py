"""
Conditions Module

Finite-horizon evaluation of the conditions that decide infinite one-sided
derivatives of T at non-dyadic points: a_n - 2n -> oo and
c_n = a_{n+1} - 2a_n + 2n - log2(a_{n+1} - a_n) -> -oo (and the mirrored versions
for the 0-digit positions b_n), the sufficient ratio/density test, the secant
slopes along the Kruppel counterexample, and a trend classifier for sampled
sequences. Every verdict here is empirical and tied to the horizon it used.
"""

import math
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from .errors import BitBudgetExceededError, DomainError, InsufficientSamplesError
from .expansion import DEFAULT_BIT_BUDGET, ONES, ZEROS, BinaryExpansion, GapRuleExpansion, stats
from .gap_generators import GapSequence, builtin_generator
from .takagi import takagi_dyadic

DEFAULT_THETA = 0.05
DEFAULT_BOUND = 10.0
DEFAULT_TOLERANCE = 0.01

Verdict = Literal["diverges_minus", "diverges_plus", "bounded", "inconclusive"]
PointVerdict = Literal["plus_infinity", "minus_infinity", "not_infinite", "inconclusive"]


class ConditionSample(BaseModel):
    """One term of the condition sequence for a gap sequence"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    a_n: int
    a_next: int
    gap: int
    begle_ayres: int
    exact_part: int
    c_n: float
    ratio: Fraction


class TrendReport(BaseModel):
    """Finite-horizon verdict on a sampled sequence"""

    model_config = ConfigDict(frozen=True)

    verdict: Verdict
    horizon: int
    window: int
    window_slope: float
    last_values: List[float]


class SufficientReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    horizon: int
    window: int
    ratio_limsup_est: float
    density_liminf_est: float
    epsilon: Optional[float]
    satisfied_empirically: bool


class PointClassification(BaseModel):
    """The four one-sided conditions at a point and the two-sided verdict they imply"""

    model_config = ConfigDict(frozen=True)

    point: str
    horizon: int
    conditions: Dict[str, TrendReport]
    right_plus_infinity: bool
    left_plus_infinity: bool
    right_minus_infinity: bool
    left_minus_infinity: bool
    verdict: PointVerdict


class ZeroRunReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    which: str
    horizon: int
    max_run: int
    bound_holds: bool
    deficiency_trend: TrendReport
    implies_infinite_derivative: bool


class DensityCorollaryReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    d1_estimate: Fraction
    ones_ratio_limsup: Optional[float]
    zeros_ratio_limsup: Optional[float]
    implies: PointVerdict


def _as_float(value: int) -> float:
    try:
        return float(value)
    except OverflowError:
        return math.inf if value > 0 else -math.inf


def _quotient(a: int, b: int) -> float:
    try:
        return a / b
    except OverflowError:
        return math.inf


def condition_sequence(g: GapSequence, N: int) -> List[ConditionSample]:
    """
    Samples n = 1..N of the condition sequence of g.

    The integer part a_{n+1} - 2a_n + 2n is exact; only log2(gap) is rounded
    (relative error of a double for gaps below 2^64).

    Raises:
        GapExhaustedError: g has fewer than N+1 terms
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    terms = g.prefix(N + 1)
    samples = []
    for n in range(1, N + 1):
        a_n, a_next = terms[n - 1], terms[n]
        gap = a_next - a_n
        exact_part = a_next - 2 * a_n + 2 * n
        samples.append(
            ConditionSample(
                n=n,
                a_n=a_n,
                a_next=a_next,
                gap=gap,
                begle_ayres=a_n - 2 * n,
                exact_part=exact_part,
                c_n=_as_float(exact_part) - math.log2(gap),
                ratio=Fraction(a_next, a_n),
            )
        )
    return samples


def begle_ayres_sequence(g: GapSequence, N: int) -> List[int]:
    """a_n - 2n for n = 1..N, which equals D at position a_n."""
    return [a - 2 * n for n, a in enumerate(g.prefix(N), start=1)]


def sufficient_check(g: GapSequence, N: int, window: Optional[int] = None) -> SufficientReport:
    """
    Windowed test of limsup a_{n+1}/a_n <= 2 - eps with liminf a_n/n > 2/eps.

    The largest eps the ratio estimate allows, min(1, 2 - ratio), is the one tried.
    """
    if N < 10:
        raise InsufficientSamplesError(f"sufficient_check needs N >= 10, got {N}")
    window = window or max(5, N // 4)
    if window > N:
        raise InsufficientSamplesError(f"window {window} exceeds horizon {N}")
    terms = g.prefix(N + 1)
    indices = range(N - window + 1, N + 1)
    ratio = max(_quotient(terms[n], terms[n - 1]) for n in indices)
    density = min(_quotient(terms[n - 1], n) for n in indices)
    epsilon = min(1.0, 2.0 - ratio)
    satisfied = epsilon > 0 and density > 2.0 / epsilon
    return SufficientReport(
        horizon=N,
        window=window,
        ratio_limsup_est=ratio,
        density_liminf_est=density,
        epsilon=epsilon if epsilon > 0 else None,
        satisfied_empirically=satisfied,
    )


class TrendClassifier:
    """Least-squares trend verdicts with fixed slope and size thresholds"""

    def __init__(self, theta: float = DEFAULT_THETA, bound: float = DEFAULT_BOUND):
        self.theta = theta
        self.bound = bound

    def classify(self, samples: Sequence[float], window: int) -> TrendReport:
        if window < 2 or window > len(samples):
            raise InsufficientSamplesError(f"window {window} needs 2 <= window <= {len(samples)}")
        tail = [_as_float(v) if isinstance(v, int) else float(v) for v in samples[-window:]]
        last = tail[-1]

        if math.isinf(last):
            slope = last
            verdict = "diverges_plus" if last > 0 else "diverges_minus"
        else:
            slope = float(np.polyfit(np.arange(window, dtype=float), np.array(tail), 1)[0])
            verdict = self._verdict(tail, slope)

        return TrendReport(
            verdict=verdict,
            horizon=len(samples),
            window=window,
            window_slope=slope,
            last_values=tail[-min(5, window):],
        )

    def _verdict(self, tail: List[float], slope: float) -> str:
        last = tail[-1]
        if slope < -self.theta and last < -self.bound:
            return "diverges_minus"
        if slope > self.theta and last > self.bound:
            return "diverges_plus"
        if max(tail) - min(tail) <= self.bound and abs(slope) <= self.theta:
            return "bounded"
        return "inconclusive"


def classify_trend(samples: Sequence[float], window: int, theta: float = DEFAULT_THETA,
                   bound: float = DEFAULT_BOUND) -> TrendReport:
    """
    Classify the tail of a sampled sequence.

    Args:
        samples: sequence values, oldest first
        window: number of trailing samples used
        theta: slope threshold
        bound: size threshold B

    Returns:
        TrendReport; diverges_minus if slope < -theta and the last value < -B,
        diverges_plus symmetrically, bounded if the window's range <= B and
        |slope| <= theta, otherwise inconclusive
    """
    return TrendClassifier(theta, bound).classify(samples, window)


def kruppel_point(base: int = 4, bit_budget: int = DEFAULT_BIT_BUDGET) -> GapRuleExpansion:
    """x = sum_n 2^-(base^n)"""
    return GapRuleExpansion(builtin_generator("kruppel", (base,)), ONES, bit_budget)


def kruppel_slope_closed_form(n: int, base: int = 4) -> int:
    """4 a_n - a_{n+1} - 6n + 7 with a_n = base^n (7 - 6n for base 4)."""
    return 4 * base**n - base ** (n + 1) - 6 * n + 7


def kruppel_window_slope(n: int, base: int = 4, bit_budget: int = DEFAULT_BIT_BUDGET) -> Fraction:
    """
    2^m [T((k+1)/2^m) - T((k-2)/2^m)] at the Kruppel point, exactly.

    Here m = a_{n+1} - 1 and k = floor(x 2^m), so k/2^m < x < (k+1)/2^m.

    Raises:
        BitBudgetExceededError: m exceeds the bit budget
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    x = kruppel_point(base, bit_budget)
    m = x.sequence.term(n + 1) - 1
    if m > bit_budget:
        raise BitBudgetExceededError(m, bit_budget)
    k = x.prefix_int(m)
    slope = (takagi_dyadic(k + 1, m) - takagi_dyadic(k - 2, m)).shift(m)
    logger.debug(f"Kruppel window n={n}, m={m}: slope {slope}")
    return slope.to_fraction()


def dyadic_interval_slope(x: BinaryExpansion, m: int) -> int:
    """
    2^m [T((k+1)/2^m) - T(k/2^m)] on the level-m dyadic interval around x; equals D_m(x).

    Raises:
        DomainError: x is dyadic and m reaches its last 1-digit (x is then an endpoint)
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    end = x.terminates_at()
    if end is not None and m >= end:
        raise DomainError(f"{x.describe()} is an endpoint of every level-{m} interval")
    k = x.prefix_int(m)
    return int((takagi_dyadic(k + 1, m) - takagi_dyadic(k, m)).shift(m))


def _holds(report: TrendReport, expected: str) -> bool:
    return report.verdict == expected


def classify_point(x: BinaryExpansion, N: int, window: int, theta: float = DEFAULT_THETA,
                   bound: float = DEFAULT_BOUND) -> PointClassification:
    """
    Evaluate the four one-sided conditions at a non-dyadic x.

    (i) a_n - 2n -> oo gives T'_+ = +oo; (ii) c_n(a) -> -oo gives T'_- = +oo;
    (iii) c_n(b) -> -oo gives T'_+ = -oo; (iv) b_n - 2n -> oo gives T'_- = -oo.
    T' = +oo iff (ii) and T' = -oo iff (iii).
    """
    if x.is_dyadic():
        raise DomainError(f"{x.describe()} is dyadic; its one-sided derivatives are known")
    classifier = TrendClassifier(theta, bound)
    ones, zeros = x.gap_sequence(ONES), x.gap_sequence(ZEROS)
    conditions = {
        "ones_begle_ayres": classifier.classify(begle_ayres_sequence(ones, N), window),
        "ones_condition": classifier.classify([s.c_n for s in condition_sequence(ones, N)], window),
        "zeros_condition": classifier.classify([s.c_n for s in condition_sequence(zeros, N)], window),
        "zeros_begle_ayres": classifier.classify(begle_ayres_sequence(zeros, N), window),
    }
    plus = _holds(conditions["ones_condition"], "diverges_minus")
    minus = _holds(conditions["zeros_condition"], "diverges_minus")
    if plus:
        verdict = "plus_infinity"
    elif minus:
        verdict = "minus_infinity"
    elif all(conditions[key].verdict in ("bounded", "diverges_plus")
             for key in ("ones_condition", "zeros_condition")):
        verdict = "not_infinite"
    else:
        verdict = "inconclusive"
    logger.info(f"Classified {x.describe()} at horizon {N}: {verdict}")
    return PointClassification(
        point=x.describe(),
        horizon=N,
        conditions=conditions,
        right_plus_infinity=_holds(conditions["ones_begle_ayres"], "diverges_plus"),
        left_plus_infinity=plus,
        right_minus_infinity=minus,
        left_minus_infinity=_holds(conditions["zeros_begle_ayres"], "diverges_plus"),
        verdict=verdict,
    )


def bounded_zero_run_check(x: BinaryExpansion, N: int, window: int, which: str = ONES,
                           theta: float = DEFAULT_THETA, bound: float = DEFAULT_BOUND) -> ZeroRunReport:
    """
    Runs of the opposite digit bounded by M imply c_n <= M + 1 - (a_n - 2n).

    With which="ones" this checks runs of 0s between consecutive 1s; together with
    a_n - 2n -> oo it gives T' = +oo. which="zeros" is the mirrored check.
    """
    samples = condition_sequence(x.gap_sequence(which), N)
    max_run = max(s.gap for s in samples) - 1
    holds = all(s.c_n <= max_run + 1 - s.begle_ayres + 1e-9 for s in samples)
    trend = classify_trend([s.begle_ayres for s in samples], window, theta, bound)
    implies = holds and trend.verdict == "diverges_plus"
    return ZeroRunReport(
        which=which,
        horizon=N,
        max_run=max_run,
        bound_holds=holds,
        deficiency_trend=trend,
        implies_infinite_derivative=implies,
    )


def ratio_limsup_window(terms: Sequence[int], fraction: float = 0.5) -> Optional[float]:
    """max a_{n+1}/a_n over the trailing `fraction` of consecutive pairs; None below two terms."""
    if len(terms) < 2:
        return None
    pairs = len(terms) - 1
    start = pairs - max(1, int(pairs * fraction))
    return max(terms[i + 1] / terms[i] for i in range(start, pairs))


def _terms_within(x: BinaryExpansion, which: str, n: int) -> Tuple[int, ...]:
    return x.gap_sequence(which).terms_upto(n)


def density_corollary(x: BinaryExpansion, n: int, tolerance: float = DEFAULT_TOLERANCE,
                      fraction: float = 0.5) -> DensityCorollaryReport:
    """
    Check the density hypotheses for an infinite derivative on the first n digits.

    0 < d1 < 1/2, or d1 = 0 with limsup a_{n+1}/a_n < 2, gives +oo;
    1/2 < d1 < 1, or d1 = 1 with limsup b_{n+1}/b_n < 2, gives -oo.
    """
    if x.is_dyadic():
        raise DomainError(f"{x.describe()} is dyadic")
    d1 = stats(x, n).density_estimate
    ones_ratio = ratio_limsup_window(_terms_within(x, ONES, n), fraction)
    zeros_ratio = ratio_limsup_window(_terms_within(x, ZEROS, n), fraction)
    d = float(d1)
    if tolerance < d < 0.5 - tolerance:
        implies = "plus_infinity"
    elif d <= tolerance and ones_ratio is not None and ones_ratio < 2 - tolerance:
        implies = "plus_infinity"
    elif 0.5 + tolerance < d < 1 - tolerance:
        implies = "minus_infinity"
    elif d >= 1 - tolerance and zeros_ratio is not None and zeros_ratio < 2 - tolerance:
        implies = "minus_infinity"
    else:
        implies = "inconclusive"
    return DensityCorollaryReport(
        n=n,
        d1_estimate=d1,
        ones_ratio_limsup=ones_ratio,
        zeros_ratio_limsup=zeros_ratio,
        implies=implies,
    )

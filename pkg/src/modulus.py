"""
Modulus Module

Scaled difference quotients (T(x+h) - T(x)) / (h log2(1/|h|)) along step schedules,
and the digit-density diagnostics that predict their limit d0(x) - d1(x).
"""

import math
from fractions import Fraction
from typing import List, Literal, Optional

from loguru import logger
from pydantic import BaseModel, ConfigDict

from .conditions import ratio_limsup_window
from .errors import DomainError
from .exact_core import Dyadic, Interval, is_power_of_two
from .expansion import ONES, ZEROS, BinaryExpansion, PeriodicExpansion, add_pow2, stats
from .kono import adversarial_step
from .takagi import takagi_enclosure, takagi_rational

DEFAULT_DENSITY_TOLERANCE = 0.01
DEFAULT_RATIO_TOLERANCE = 0.1
DEFAULT_WINDOW_FRACTION = 0.5
DEFAULT_REL_WIDTH = Fraction(1, 10**6)

SCHEDULES = ("plain", "zeros", "kono_window")

Schedule = Literal["plain", "zeros", "kono_window"]
RegularCase = Literal["a", "b", "c", "irregular", "undetermined"]


class DensityReport(BaseModel):
    """Digit density I_n/n and the density-regularity case it suggests"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    d1_estimate: Fraction
    regular_case: RegularCase
    ones_ratio: Optional[float] = None
    zeros_ratio: Optional[float] = None
    note: Optional[str] = None

    def predicted_limit(self) -> Optional[Fraction]:
        """d0 - d1 when the point looks density-regular."""
        if self.regular_case in ("a", "b", "c"):
            return 1 - 2 * self.d1_estimate
        return None


class ModulusPoint(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    index: int
    h: Dyadic
    ratio: float
    delta: Optional[Fraction] = None
    width: Optional[Dyadic] = None
    flagged: bool = False


class ModulusTrace(BaseModel):
    """Scaled quotients along one step schedule"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    point: str
    schedule: Schedule
    points: List[ModulusPoint]
    predicted_limit: Optional[float] = None

    @property
    def flagged_count(self) -> int:
        return sum(1 for pt in self.points if pt.flagged)


def density_estimate(x: BinaryExpansion, n: int, tolerance: float = DEFAULT_DENSITY_TOLERANCE,
                     ratio_tolerance: float = DEFAULT_RATIO_TOLERANCE,
                     fraction: float = DEFAULT_WINDOW_FRACTION) -> DensityReport:
    """
    Exact I_n/n plus a windowed guess at which density-regular case applies.

    Args:
        x: the point
        n: horizon (digits counted)
        tolerance: how close estimates must be to 0, 1 or each other
        ratio_tolerance: how close the gap ratio must be to 1 in cases b and c
        fraction: the earlier horizon compared against is n * fraction

    Returns:
        DensityReport; "irregular" when the estimate still drifts or a gap ratio
        stays away from 1, "undetermined" when too few digits were seen
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    d1 = stats(x, n).density_estimate
    if x.terminates_at() is not None:
        return DensityReport(n=n, d1_estimate=d1, regular_case="b", note="finitely many ones")
    if n < 16:
        return DensityReport(n=n, d1_estimate=d1, regular_case="undetermined", note="horizon too short")

    earlier = stats(x, max(1, int(n * fraction))).density_estimate
    if abs(float(d1 - earlier)) > tolerance:
        return DensityReport(n=n, d1_estimate=d1, regular_case="irregular", note="density estimate still moving")

    d = float(d1)
    if tolerance < d < 1 - tolerance:
        return DensityReport(n=n, d1_estimate=d1, regular_case="a")

    which = ONES if d <= tolerance else ZEROS
    ratio = ratio_limsup_window(x.gap_sequence(which).terms_upto(n), fraction)
    field = "ones_ratio" if which == ONES else "zeros_ratio"
    if ratio is None:
        return DensityReport(n=n, d1_estimate=d1, regular_case="undetermined", note=f"too few {which}")
    if abs(ratio - 1) <= ratio_tolerance:
        case = "b" if which == ONES else "c"
    else:
        case = "irregular"
    return DensityReport(n=n, d1_estimate=d1, regular_case=case, **{field: ratio})


def _log2_inverse(h: Dyadic) -> float:
    """log2(1/|h|) for a dyadic h = num / 2^exp."""
    value = h.exp - math.log2(abs(h.num))
    if value <= 0:
        raise DomainError(f"step {h} must satisfy 0 < |h| < 1")
    return value


def _delta_rational(x: Fraction, h: Dyadic) -> Fraction:
    target = x + h.to_fraction()
    if h == 0 or not 0 < target < 1:
        raise DomainError(f"need h != 0 and 0 < x + h < 1, got x={x}, h={h}")
    if h > 0:
        return takagi_rational(target) - takagi_rational(x)
    # T(1 - t) = T(t)
    return takagi_rational(1 - x + abs(h).to_fraction()) - takagi_rational(1 - x)


def _exact_scaled(delta: Fraction, h: Dyadic, two_sided_abs: bool) -> Fraction:
    scale = abs(h) if two_sided_abs else h
    return delta / scale.to_fraction()


def scaled_quotient(x: Fraction, h: Dyadic) -> float:
    """
    (T(x+h) - T(x)) / (h log2(1/|h|)) from the exact difference.

    For dyadic x the denominator uses |h|, so the quotient tends to 1 from both sides.
    Negative h goes through the reflection x -> 1 - x.
    """
    x, h = Fraction(x), Dyadic.coerce(h)
    delta = _delta_rational(x, h)
    dyadic_point = is_power_of_two(x.denominator)
    return float(_exact_scaled(delta, h, dyadic_point)) / _log2_inverse(h)


def scaled_quotient_exact(x: Fraction, h: Dyadic) -> Fraction:
    """The same quotient as an exact rational; h must be +-2^-j."""
    x, h = Fraction(x), Dyadic.coerce(h)
    if abs(h.num) != 1:
        raise DomainError(f"exact quotients need h = +-2^-j, got {h}")
    delta = _delta_rational(x, h)
    dyadic_point = is_power_of_two(x.denominator)
    return _exact_scaled(delta, h, dyadic_point) / _log2_exponent(h)


def _log2_exponent(h: Dyadic) -> int:
    if h.exp < 1:
        raise DomainError(f"step {h} must satisfy 0 < |h| < 1")
    return h.exp


def _delta_enclosed(x: BinaryExpansion, p: int, negative: bool) -> Interval:
    """Enclosure of T(x +- 2^-p) - T(x) with N = 2p series terms on each side."""
    base = x.reflect() if negative else x
    shifted, _ = add_pow2(base, p)
    n_terms = 2 * p
    return takagi_enclosure(shifted, n_terms) - takagi_enclosure(base, n_terms)


def _schedule_steps(x: BinaryExpansion, schedule: str, count: int, start: int):
    """Yield (index, p, negative) triples; every step is +-2^-p."""
    if schedule == "plain":
        for j in range(start, start + count):
            yield j, j, False
            yield j, j, True
    elif schedule == "zeros":
        zeros = x.gap_sequence(ZEROS).prefix(count)
        for n, b in enumerate(zeros, start=1):
            yield n, b, False
    elif schedule == "kono_window":
        zeros = x.gap_sequence(ZEROS).prefix(count + 1)
        for n in range(1, count + 1):
            p, mstar = adversarial_step(zeros, n)
            logger.debug(f"kono_window n={n}: p={p}, m*={mstar}")
            yield n, p, False
    else:
        raise DomainError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")


def _measure(x: BinaryExpansion, index: int, p: int, negative: bool, dyadic_point: bool,
             rel_width: Fraction) -> ModulusPoint:
    h = Dyadic.pow2(-p)
    h = -h if negative else h
    value = x.rational_value()
    if value is not None:
        delta = _delta_rational(value, h)
        return ModulusPoint(index=index, h=h, ratio=float(_exact_scaled(delta, h, dyadic_point) / p), delta=delta)

    enclosure = _delta_enclosed(x, p, negative)
    mid = enclosure.midpoint().to_fraction()
    width = enclosure.width()
    flagged = width.to_fraction() >= rel_width * abs(mid)
    if flagged:
        logger.warning(f"Enclosure too wide at {x.describe()}, h={h}: width {float(width):.3e}")
    return ModulusPoint(
        index=index,
        h=h,
        ratio=float(_exact_scaled(mid, h, dyadic_point) / p),
        width=width,
        flagged=flagged,
    )


def modulus_experiment(x: BinaryExpansion, schedule: str, count: int, start: int = 16,
                       density_horizon: int = 4096,
                       rel_width: Fraction = DEFAULT_REL_WIDTH) -> ModulusTrace:
    """
    Scaled quotients of T at x along a step schedule.

    Args:
        x: the point
        schedule: "plain" (h = +-2^-j, j = start..start+count-1), "zeros"
                  (h = 2^-b_n) or "kono_window" (h = 2^-(b_{n+1} - m*))
        count: number of schedule indices
        start: first j of the plain schedule
        density_horizon: digits used for the predicted limit
        rel_width: enclosure points with width >= rel_width * |delta| are flagged

    Returns:
        ModulusTrace; exact differences for rational x, enclosure midpoints otherwise

    Raises:
        GapExhaustedError: the schedule needs more 0-digits than x has
        AllOnesPrefixError: a step cannot be added
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    dyadic_point = x.is_dyadic()
    points = [
        _measure(x, index, p, negative, dyadic_point, rel_width)
        for index, p, negative in _schedule_steps(x, schedule, count, start)
    ]

    if dyadic_point:
        predicted = Fraction(1)
    elif isinstance(x, PeriodicExpansion):
        predicted = 1 - 2 * x.ones_density()
    else:
        predicted = density_estimate(x, density_horizon).predicted_limit()

    trace = ModulusTrace(
        point=x.describe(),
        schedule=schedule,
        points=points,
        predicted_limit=float(predicted) if predicted is not None else None,
    )
    logger.info(f"Modulus trace {schedule} at {x.describe()}: {len(points)} points, {trace.flagged_count} flagged")
    return trace

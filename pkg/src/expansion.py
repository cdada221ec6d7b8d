"""
Expansion Module

Binary-expansion models of points in [0, 1): digit access, the gap sequences a_n
(positions of 1-digits) and b_n (positions of 0-digits), digit statistics
O_n / I_n / D_n, reflection x -> 1 - x and exact addition of a step 2^-p.

Dyadic points always use the representation that ends in zeros.
"""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict

from .errors import (
    AllOnesPrefixError,
    BitBudgetExceededError,
    DomainError,
    ExpansionOverflowError,
    GapExhaustedError,
)
from .exact_core import Dyadic, bit_count, is_power_of_two
from .gap_generators import GapSequence

DEFAULT_BIT_BUDGET = 1 << 20

ONES = "ones"
ZEROS = "zeros"


class DigitStats(BaseModel):
    """Digit counts over the first n binary digits"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    ones: int
    zeros: int
    deficiency: int
    density_estimate: Fraction


class BinaryExpansion(ABC):
    """A digit stream eps_1 eps_2 ... of a point in [0, 1)"""

    def __init__(self, bit_budget: int = DEFAULT_BIT_BUDGET):
        self.bit_budget = bit_budget

    def _check_position(self, k: int) -> None:
        if k < 1:
            raise ValueError(f"digit positions start at 1, got {k}")
        if k > self.bit_budget:
            raise BitBudgetExceededError(k, self.bit_budget)

    def digit(self, k: int) -> int:
        """eps_k, 1-indexed."""
        self._check_position(k)
        return self._digit(k)

    def digits(self, n: int) -> List[int]:
        return [self.digit(k) for k in range(1, n + 1)]

    def prefix_int(self, n: int) -> int:
        """The first n digits read as a binary integer, i.e. floor(x * 2^n)."""
        if n == 0:
            return 0
        self._check_position(n)
        return self._prefix_int(n)

    def truncation(self, n: int) -> Dyadic:
        """x_n = floor(x * 2^n) / 2^n"""
        return Dyadic(self.prefix_int(n), n)

    def rademacher(self, k: int) -> int:
        """X_k = 1 - 2 eps_k"""
        return 1 - 2 * self.digit(k)

    def rational_value(self) -> Optional[Fraction]:
        """Exact value when the backend knows it, else None."""
        return None

    def is_dyadic(self) -> bool:
        return False

    def terminates_at(self) -> Optional[int]:
        """Position of the last 1-digit for dyadic points (0 for x = 0), else None."""
        return None

    @abstractmethod
    def _digit(self, k: int) -> int:
        ...

    def _prefix_int(self, n: int) -> int:
        return int("".join(str(self._digit(k)) for k in range(1, n + 1)), 2)

    @abstractmethod
    def reflect(self) -> "BinaryExpansion":
        ...

    @abstractmethod
    def describe(self) -> str:
        ...

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()}>"

    def _scan_positions(self, bit: int, start: int = 1) -> Iterator[int]:
        k = start
        while True:
            if k > self.bit_budget:
                raise BitBudgetExceededError(k, self.bit_budget)
            if self._digit(k) == bit:
                yield k
            k += 1

    def gap_sequence(self, which: str = ONES) -> GapSequence:
        """Lazy a_n (which="ones") or b_n (which="zeros") for this point."""
        bit = _which_bit(which)
        return GapSequence(f"digits[{which}]", (self.describe(),), lambda: self._scan_positions(bit))


def _which_bit(which: str) -> int:
    if which == ONES:
        return 1
    if which == ZEROS:
        return 0
    raise ValueError(f"which must be 'ones' or 'zeros', got {which!r}")


class FiniteDyadicExpansion(BinaryExpansion):
    """A dyadic point num/2^exp; digits are eventually all zero"""

    def __init__(self, value: Dyadic, bit_budget: int = DEFAULT_BIT_BUDGET):
        super().__init__(bit_budget)
        if value < 0 or not value < 1:
            raise DomainError(f"dyadic point {value} is outside [0, 1)")
        self.value = value

    def _digit(self, k: int) -> int:
        if k > self.value.exp:
            return 0
        return (self.value.num >> (self.value.exp - k)) & 1

    def _prefix_int(self, n: int) -> int:
        e = self.value.exp
        if n >= e:
            return self.value.num << (n - e)
        return self.value.num >> (e - n)

    def rational_value(self) -> Fraction:
        return self.value.to_fraction()

    def is_dyadic(self) -> bool:
        return True

    def terminates_at(self) -> int:
        return self.value.exp

    def gap_sequence(self, which: str = ONES) -> GapSequence:
        if _which_bit(which) == 1:
            e = self.value.exp
            ones = tuple(k for k in range(1, e + 1) if self._digit(k))
            return GapSequence("digits[ones]", (self.describe(),), lambda: iter(ones))
        return super().gap_sequence(which)

    def reflect(self) -> "FiniteDyadicExpansion":
        if self.value == Dyadic(0):
            raise DomainError("cannot reflect x = 0 inside [0, 1)")
        return FiniteDyadicExpansion(1 - self.value, self.bit_budget)

    def describe(self) -> str:
        return f"dyadic:{self.value.num}/{1 << self.value.exp}"


class PeriodicExpansion(BinaryExpansion):
    """A rational point: finite preperiod followed by a primitive repeating period"""

    def __init__(self, preperiod: Tuple[int, ...], period: Tuple[int, ...], value: Fraction,
                 bit_budget: int = DEFAULT_BIT_BUDGET):
        super().__init__(bit_budget)
        if not period:
            raise ValueError("period must be nonempty")
        self.preperiod = tuple(preperiod)
        self.period = tuple(period)
        self.value = value

    def _digit(self, k: int) -> int:
        pre = len(self.preperiod)
        if k <= pre:
            return self.preperiod[k - 1]
        return self.period[(k - 1 - pre) % len(self.period)]

    def _prefix_int(self, n: int) -> int:
        scaled = self.value * (1 << n)
        return scaled.numerator // scaled.denominator

    def rational_value(self) -> Fraction:
        return self.value

    def ones_density(self) -> Fraction:
        return Fraction(sum(self.period), len(self.period))

    def reflect(self) -> "PeriodicExpansion":
        return PeriodicExpansion(
            tuple(1 - b for b in self.preperiod),
            tuple(1 - b for b in self.period),
            1 - self.value,
            self.bit_budget,
        )

    def describe(self) -> str:
        return f"rational:{self.value.numerator}/{self.value.denominator}"


class GapRuleExpansion(BinaryExpansion):
    """A point given by a rule for the positions of its 1-digits (or of its 0-digits)"""

    def __init__(self, sequence: GapSequence, role: str = ONES, bit_budget: int = DEFAULT_BIT_BUDGET):
        super().__init__(bit_budget)
        _which_bit(role)
        self.sequence = sequence
        self.role = role

    def _digit(self, k: int) -> int:
        hit = self.sequence.contains(k)
        return int(hit) if self.role == ONES else int(not hit)

    def _prefix_int(self, n: int) -> int:
        marked = self.sequence.terms_upto(n)
        fill, mark = ("0", "1") if self.role == ONES else ("1", "0")
        bits = [fill] * n
        for pos in marked:
            bits[pos - 1] = mark
        return int("".join(bits), 2)

    def gap_sequence(self, which: str = ONES) -> GapSequence:
        if which == self.role:
            return self.sequence
        _which_bit(which)
        return self.sequence.complement(self.bit_budget)

    def reflect(self) -> "GapRuleExpansion":
        flipped = ZEROS if self.role == ONES else ONES
        return GapRuleExpansion(self.sequence, flipped, self.bit_budget)

    def describe(self) -> str:
        prefix = "gaps" if self.role == ONES else "cogaps"
        rule = self.sequence.kind
        if self.sequence.params:
            rule += ":" + ",".join(str(p) for p in self.sequence.params)
        return f"{prefix}:{rule}"


class PrefixPatchedExpansion(BinaryExpansion):
    """A base stream with its first p digits replaced; the result of x + 2^-p on rule points"""

    def __init__(self, base: BinaryExpansion, prefix: Tuple[int, ...]):
        super().__init__(base.bit_budget)
        self.base = base
        self.prefix = tuple(prefix)

    def _digit(self, k: int) -> int:
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.base.digit(k)

    def _prefix_int(self, n: int) -> int:
        p = len(self.prefix)
        head = int("".join(map(str, self.prefix[:n])), 2) if self.prefix else 0
        if n <= p:
            return head
        tail = self.base.prefix_int(n) & ((1 << (n - p)) - 1)
        return (head << (n - p)) | tail

    def is_dyadic(self) -> bool:
        return self.base.is_dyadic()

    def reflect(self) -> "PrefixPatchedExpansion":
        return PrefixPatchedExpansion(self.base.reflect(), tuple(1 - b for b in self.prefix))

    def describe(self) -> str:
        bits = "".join(map(str, self.prefix))
        return f"{self.base.describe()}+patch[{bits}]"


def expansion_of_rational(x: Fraction, bit_budget: int = DEFAULT_BIT_BUDGET) -> BinaryExpansion:
    """
    Binary expansion of a rational x in [0, 1).

    Dyadic x gives a FiniteDyadicExpansion; otherwise long division with remainder
    cycle detection gives the preperiod and the primitive period.
    """
    x = Fraction(x)
    if not 0 <= x < 1:
        raise DomainError(f"{x} is outside [0, 1)")
    den = x.denominator
    if is_power_of_two(den):
        return FiniteDyadicExpansion(Dyadic.from_fraction(x), bit_budget)

    seen = {}
    bits: List[int] = []
    r = x.numerator
    while r not in seen:
        seen[r] = len(bits)
        r <<= 1
        bits.append(r // den)
        r %= den
    start = seen[r]
    logger.debug(f"Expanded {x}: preperiod {start}, period {len(bits) - start}")
    return PeriodicExpansion(tuple(bits[:start]), tuple(bits[start:]), x, bit_budget)


def digit(x: BinaryExpansion, k: int) -> int:
    return x.digit(k)


def stats(x: BinaryExpansion, n: int) -> DigitStats:
    """Exact O_n, I_n and D_n over the first n digits."""
    if n < 1:
        raise ValueError(f"stats needs n >= 1, got {n}")
    ones = bit_count(x.prefix_int(n))
    zeros = n - ones
    return DigitStats(
        n=n,
        ones=ones,
        zeros=zeros,
        deficiency=zeros - ones,
        density_estimate=Fraction(ones, n),
    )


def deficiency(x: BinaryExpansion, n: int) -> int:
    """D_n; D_0 = 0."""
    if n == 0:
        return 0
    return stats(x, n).deficiency


def gaps(x: BinaryExpansion, count: int, which: str = ONES) -> Tuple[int, ...]:
    """
    First `count` positions of the 1-digits (a_n) or 0-digits (b_n).

    Raises:
        GapExhaustedError: a dyadic point has fewer than `count` ones
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    sequence = x.gap_sequence(which)
    try:
        return sequence.prefix(count)
    except GapExhaustedError:
        raise GapExhaustedError(f"{x.describe()} has fewer than {count} {which}")


def reflect(x: BinaryExpansion) -> BinaryExpansion:
    """Expansion of 1 - x (renormalized to trailing zeros when x is dyadic)."""
    return x.reflect()


def add_pow2(x: BinaryExpansion, p: int) -> Tuple[BinaryExpansion, int]:
    """
    Add the step 2^-p to x.

    With q the last position <= p holding a 0, the sum flips eps_q to 1, clears
    positions q+1..p and leaves every position after p alone. The agreement
    length is k0 = q - 1.

    Args:
        x: the point
        p: step exponent, >= 1

    Returns:
        (expansion of x + 2^-p, k0)

    Raises:
        ExpansionOverflowError: x + 2^-p >= 1
        AllOnesPrefixError: no 0-digit at or before position p
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    value = x.rational_value()
    if value is not None and value + Fraction(1, 1 << p) >= 1:
        raise ExpansionOverflowError(f"{x.describe()} + 2^-{p} >= 1")

    head = x.digits(p)
    q = next((j for j in range(p, 0, -1) if head[j - 1] == 0), None)
    if q is None:
        raise AllOnesPrefixError(f"first {p} digits of {x.describe()} are all 1")
    k0 = q - 1

    if value is not None:
        return expansion_of_rational(value + Fraction(1, 1 << p), x.bit_budget), k0

    new_head = head[: q - 1] + [1] + [0] * (p - q)
    if isinstance(x, PrefixPatchedExpansion) and len(x.prefix) > p:
        new_head += list(x.prefix[p:])
    base = x.base if isinstance(x, PrefixPatchedExpansion) else x
    return PrefixPatchedExpansion(base, tuple(new_head)), k0

"""
Exact Core Module

Arbitrary-precision exact arithmetic for the rest of the lab: dyadic rationals
k/2^m, general rationals (``fractions.Fraction``), outward-rounded dyadic intervals
and bit-count utilities. No machine floats are used anywhere in this module.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Union

# General rationals p/q are plain Fractions: always reduced, positive denominator.
Rat = Fraction

Number = Union[int, Fraction, "Dyadic"]


def bit_count(j: int) -> int:
    """Number of 1-bits in the binary representation of j (s_j)."""
    if j < 0:
        raise ValueError(f"bit_count needs a nonnegative integer, got {j}")
    return j.bit_count()


def popcount_prefix_sum(k: int) -> int:
    """
    Sum of s_j over 0 <= j < k.

    Runs top-down over the bits of k using S(2k) = 2S(k) + k and
    S(2k + 1) = S(2k) + s_k, so the cost is linear in the bit length.
    """
    if k < 0:
        raise ValueError(f"popcount_prefix_sum needs k >= 0, got {k}")
    total = 0
    prefix = 0
    ones = 0
    for ch in bin(k)[2:] if k else "":
        total = 2 * total + prefix
        prefix <<= 1
        if ch == "1":
            total += ones
            prefix |= 1
            ones += 1
    return total


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@total_ordering
@dataclass(frozen=True)
class Dyadic:
    """Exact dyadic rational num / 2^exp in canonical form (exp == 0 or num odd)"""

    num: int
    exp: int = 0

    def __post_init__(self):
        num, exp = self.num, self.exp
        if exp < 0:
            num, exp = num << -exp, 0
        if num == 0:
            exp = 0
        elif exp:
            shift = min((num & -num).bit_length() - 1, exp)
            num, exp = num >> shift, exp - shift
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    @classmethod
    def pow2(cls, e: int) -> "Dyadic":
        """2^e for any integer e."""
        return cls(1, -e)

    @classmethod
    def coerce(cls, value: Number) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Dyadic":
        den = value.denominator
        if not is_power_of_two(den):
            raise ValueError(f"{value} is not a dyadic rational")
        return cls(value.numerator, den.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def shift(self, k: int) -> "Dyadic":
        """Multiply by 2^k."""
        return Dyadic(self.num, self.exp - k)

    def is_integer(self) -> bool:
        return self.exp == 0

    def __int__(self) -> int:
        if self.exp:
            raise ValueError(f"{self} is not an integer")
        return self.num

    def __add__(self, other: Number) -> "Dyadic":
        other = Dyadic.coerce(other)
        e = max(self.exp, other.exp)
        return Dyadic((self.num << (e - self.exp)) + (other.num << (e - other.exp)), e)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "Dyadic":
        return self + (-Dyadic.coerce(other))

    def __rsub__(self, other: Number) -> "Dyadic":
        return Dyadic.coerce(other) - self

    def __mul__(self, other: Number) -> "Dyadic":
        other = Dyadic.coerce(other)
        return Dyadic(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.exp)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.num), self.exp)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (int, Fraction, Dyadic)):
            return NotImplemented
        if isinstance(other, Fraction) and not is_power_of_two(other.denominator):
            return False
        return compare(self, other) == 0

    def __hash__(self) -> int:
        # equal to hash(Fraction) and hash(int) of the same value
        return hash(self.to_fraction())

    def __lt__(self, other: Number) -> bool:
        return compare(self, other) < 0

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __str__(self) -> str:
        if self.exp == 0:
            return str(self.num)
        return f"{self.num}/{1 << self.exp}"


def _non_dyadic(value: Number) -> bool:
    return isinstance(value, Fraction) and not is_power_of_two(value.denominator)


def _as_rational(value: Number) -> Union[int, Fraction]:
    return value.to_fraction() if isinstance(value, Dyadic) else value


def compare(a: Number, b: Number) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if _non_dyadic(a) or _non_dyadic(b):
        left, right = Fraction(_as_rational(a)), Fraction(_as_rational(b))
        return (left > right) - (left < right)
    a, b = Dyadic.coerce(a), Dyadic.coerce(b)
    e = max(a.exp, b.exp)
    left = a.num << (e - a.exp)
    right = b.num << (e - b.exp)
    return (left > right) - (left < right)


def dyadic_arith(a: Dyadic, b: Dyadic, op: str):
    """
    Exact dyadic arithmetic by operation name.

    Args:
        a: left operand
        b: right operand
        op: one of "add", "sub", "mul", "cmp"

    Returns:
        A canonical Dyadic for add/sub/mul, or -1/0/1 for cmp
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "cmp":
        return compare(a, b)
    raise ValueError(f"unknown dyadic operation {op!r}")


def floor_dyadic(value: Fraction, bits: int) -> Dyadic:
    """Largest multiple of 2^-bits that is <= value."""
    scaled = value * (1 << bits)
    return Dyadic(scaled.numerator // scaled.denominator, bits)


def ceil_dyadic(value: Fraction, bits: int) -> Dyadic:
    """Smallest multiple of 2^-bits that is >= value."""
    scaled = value * (1 << bits)
    return Dyadic(-((-scaled.numerator) // scaled.denominator), bits)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with exact dyadic endpoints"""

    lo: Dyadic
    hi: Dyadic

    def __post_init__(self):
        object.__setattr__(self, "lo", Dyadic.coerce(self.lo))
        object.__setattr__(self, "hi", Dyadic.coerce(self.hi))
        if self.hi < self.lo:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: Number) -> "Interval":
        d = Dyadic.coerce(value)
        return cls(d, d)

    @classmethod
    def enclose(cls, value: Fraction, bits: int) -> "Interval":
        """Outward-rounded enclosure of an exact rational, width <= 2^-bits."""
        if is_power_of_two(value.denominator):
            return cls.point(Dyadic.from_fraction(value))
        return cls(floor_dyadic(value, bits), ceil_dyadic(value, bits))

    @classmethod
    def around(cls, center: Dyadic, radius: Dyadic) -> "Interval":
        return cls(center - radius, center + radius)

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def midpoint(self) -> Dyadic:
        return (self.lo + self.hi).shift(-1)

    def magnitude(self) -> Dyadic:
        """max |t| over t in the interval"""
        return max(abs(self.lo), abs(self.hi))

    def contains(self, value: Union[Number, "Interval"]) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        if isinstance(value, Fraction) and not is_power_of_two(value.denominator):
            return self.lo.to_fraction() <= value <= self.hi.to_fraction()
        return self.lo <= Dyadic.coerce(value) <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other: Union["Interval", Number]) -> "Interval":
        if not isinstance(other, Interval):
            other = Interval.point(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: Union["Interval", Number]) -> "Interval":
        if not isinstance(other, Interval):
            other = Interval.point(other)
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def scale(self, factor: Number) -> "Interval":
        factor = Dyadic.coerce(factor)
        a, b = self.lo * factor, self.hi * factor
        return Interval(min(a, b), max(a, b))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def interval_ops(a: Interval, b: Union[Interval, Dyadic], op: str) -> Interval:
    """
    Interval arithmetic by operation name.

    Args:
        a: left interval
        b: right interval, or the Dyadic factor for "scale"
        op: one of "add", "sub", "scale"

    Returns:
        An interval enclosing every exact result
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown interval operation {op!r}")


def format_rational(value: Union[Fraction, Dyadic, int]) -> str:
    """Serialize an exact value as "num/den" (or "num" when integral)."""
    if isinstance(value, Dyadic):
        value = value.to_fraction()
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"

"""
Gap Generators Module

Lazily generated, strictly increasing position sequences a_1 < a_2 < ... and the
catalogue of named rules used by the expansion spec grammar.
"""

import bisect
import math
import threading
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from loguru import logger
from sympy import sieve

from .errors import BitBudgetExceededError, GapExhaustedError, GeneratorError


class GapSequence:
    """Strictly increasing positive integers, generated on demand and memoized"""

    def __init__(self, kind: str, params: Tuple = (), factory: Optional[Callable[[], Iterator[int]]] = None):
        self.kind = kind
        self.params = tuple(params)
        self._factory = factory or _rule_factory(kind, self.params)
        self._source = self._factory()
        self._values: List[int] = []
        self._exhausted = False
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        if self.params:
            return f"GapSequence({self.kind}:{','.join(str(p) for p in self.params)})"
        return f"GapSequence({self.kind})"

    def _extend_locked(self) -> bool:
        try:
            value = next(self._source)
        except StopIteration:
            self._exhausted = True
            return False
        previous = self._values[-1] if self._values else 0
        if value <= previous:
            raise GeneratorError(
                f"{self!r} is not strictly increasing at term {len(self._values) + 1}: "
                f"{value} after {previous}"
            )
        self._values.append(value)
        return True

    def _ensure_count(self, count: int) -> None:
        if count <= len(self._values):
            return
        with self._lock:
            while len(self._values) < count:
                if self._exhausted or not self._extend_locked():
                    raise GapExhaustedError(f"{self!r} has only {len(self._values)} terms")

    def _ensure_reaches(self, position: int) -> bool:
        """Generate until the last term is >= position; False if the sequence ends first."""
        if self._values and self._values[-1] >= position:
            return True
        with self._lock:
            while not self._values or self._values[-1] < position:
                if self._exhausted or not self._extend_locked():
                    return False
        return True

    def term(self, n: int) -> int:
        """a_n, 1-indexed."""
        if n < 1:
            raise ValueError(f"term index must be >= 1, got {n}")
        self._ensure_count(n)
        return self._values[n - 1]

    def prefix(self, count: int) -> Tuple[int, ...]:
        self._ensure_count(count)
        return tuple(self._values[:count])

    def contains(self, position: int) -> bool:
        self._ensure_reaches(position)
        i = bisect.bisect_left(self._values, position)
        return i < len(self._values) and self._values[i] == position

    def count_upto(self, position: int) -> int:
        """Number of terms <= position."""
        self._ensure_reaches(position)
        return bisect.bisect_right(self._values, position)

    def terms_upto(self, position: int) -> Tuple[int, ...]:
        return tuple(self._values[: self.count_upto(position)])

    def complement(self, position_limit: Optional[int] = None) -> "GapSequence":
        """
        The positive integers not in this sequence, in order.

        Scanning past position_limit raises BitBudgetExceededError.
        """
        base = self

        def factory() -> Iterator[int]:
            n = 0
            k = 1
            while True:
                if position_limit is not None and k > position_limit:
                    raise BitBudgetExceededError(k, position_limit)
                if base._ensure_reaches(k):
                    while base._values[n] < k:
                        n += 1
                    if base._values[n] == k:
                        k += 1
                        continue
                yield k
                k += 1

        return GapSequence(f"complement({self.kind})", self.params, factory)


def _linear(c: int) -> Iterator[int]:
    n = 1
    while True:
        yield c * n
        n += 1


def _poly(*coeffs: int) -> Iterator[int]:
    n = 1
    while True:
        yield sum(c * n**i for i, c in enumerate(coeffs))
        n += 1


def _geo(alpha: Fraction) -> Iterator[int]:
    power = Fraction(1)
    while True:
        power *= alpha
        yield math.floor(power)


def _power(base: int) -> Iterator[int]:
    value = 1
    while True:
        value *= base
        yield value


def _pow2plus(beta: Fraction) -> Iterator[int]:
    n = 1
    while True:
        yield (1 << n) + math.floor(beta * n)
        n += 1


def _primes() -> Iterator[int]:
    n = 1
    while True:
        yield sieve[n]
        n += 1


def _sqrtdrift() -> Iterator[int]:
    n = 1
    while True:
        yield 2 * n + math.isqrt(n)
        n += 1


def _logdrift() -> Iterator[int]:
    n = 1
    while True:
        # floor(log2 n) == bit_length - 1; the +2 keeps the first term clear of position 1
        yield 2 * n + n.bit_length() + 1
        n += 1


def _normalmix() -> Iterator[int]:
    a = 3
    n = 1
    while True:
        yield a
        if a <= 2 * n + math.isqrt(n):
            a = 2 * n + 3 * math.isqrt(n)
        else:
            a += 1
        n += 1


def _parse_fraction(raw) -> Fraction:
    try:
        return Fraction(str(raw))
    except (ValueError, ZeroDivisionError) as e:
        raise GeneratorError(f"bad numeric parameter {raw!r}: {e}")


def _parse_int(raw) -> int:
    try:
        return int(str(raw))
    except ValueError as e:
        raise GeneratorError(f"bad integer parameter {raw!r}: {e}")


def _checked(name: str, params: Tuple) -> Tuple[Callable[..., Iterator[int]], Tuple]:
    if name == "linear":
        if len(params) != 1:
            raise GeneratorError("linear takes one integer slope")
        c = _parse_int(params[0])
        if c < 2:
            raise GeneratorError(f"linear slope must be >= 2, got {c}")
        return _linear, (c,)
    if name == "poly":
        if not params:
            raise GeneratorError("poly needs at least one coefficient")
        coeffs = tuple(_parse_int(p) for p in params)
        degree = max((i for i, c in enumerate(coeffs) if c), default=0)
        if degree == 1 and coeffs[1] == 1:
            # n + c0 covers every position past c0
            raise GeneratorError(f"poly {coeffs} covers every position from some index on")
        return _poly, coeffs
    if name == "geo":
        if len(params) != 1:
            raise GeneratorError("geo takes one base alpha")
        alpha = _parse_fraction(params[0])
        if alpha <= 1:
            raise GeneratorError(f"geo base must exceed 1, got {alpha}")
        return _geo, (alpha,)
    if name == "kruppel":
        if len(params) > 1:
            raise GeneratorError("kruppel takes at most one base")
        base = _parse_int(params[0]) if params else 4
        if base < 2:
            raise GeneratorError(f"kruppel base must be >= 2, got {base}")
        return _power, (base,)
    if name == "pow2plus":
        if len(params) != 1:
            raise GeneratorError("pow2plus takes one slope beta")
        return _pow2plus, (_parse_fraction(params[0]),)
    if name in SIMPLE_RULES:
        if params:
            raise GeneratorError(f"{name} takes no parameters")
        return SIMPLE_RULES[name], ()
    raise GeneratorError(f"unknown generator {name!r}")


SIMPLE_RULES: Dict[str, Callable[[], Iterator[int]]] = {
    "primes": _primes,
    "sqrtdrift": _sqrtdrift,
    "logdrift": _logdrift,
    "normalmix": _normalmix,
}

GENERATOR_NAMES = ("linear", "poly", "geo", "kruppel", "pow2plus") + tuple(SIMPLE_RULES)


def _rule_factory(name: str, params: Tuple) -> Callable[[], Iterator[int]]:
    func, args = _checked(name, params)
    return lambda: func(*args)


def builtin_generator(name: str, params: Tuple = ()) -> GapSequence:
    """
    Build one of the named gap sequences.

    Args:
        name: rule name (linear, poly, geo, kruppel, pow2plus, primes, sqrtdrift,
              logdrift, normalmix)
        params: rule parameters as strings or numbers

    Returns:
        A lazily generated GapSequence; a non-monotone parameterization raises
        GeneratorError when the offending term is generated
    """
    func, args = _checked(name, tuple(params))
    logger.debug(f"Building generator {name} with params {args}")
    return GapSequence(name, args, lambda: func(*args))

"""
Selftest Module

The acceptance suite behind `python -m src.cli selftest`: exact identities, closed
forms and finite-horizon envelopes, each run in-process with a fixed seed and
summarized as PASS/FAIL lines.
"""

import math
import random
import time
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from loguru import logger
from pydantic import BaseModel

from .conditions import condition_sequence, dyadic_interval_slope, kruppel_window_slope
from .config import LabConfig
from .errors import ExpansionOverflowError
from .exact_core import Dyadic
from .expansion import deficiency, expansion_of_rational
from .expansion_spec import parse_expansion_spec
from .gap_generators import builtin_generator
from .kono import kono_split, maximize_f, sigma2_factor
from .modulus import modulus_experiment, scaled_quotient
from .takagi import takagi_dyadic, takagi_rational


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str
    seconds: float


CheckFn = Callable[["SelftestContext"], Tuple[bool, str]]


class SelftestContext:
    """Seeded randomness and case counts shared by the checks"""

    def __init__(self, config: LabConfig, quick: bool = False, seed: Optional[int] = None):
        self.config = config
        self.quick = quick
        self.seed = config.selftest.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.divisor = config.selftest.quick_divisor if quick else 1

    def cases(self, full: int) -> int:
        return max(1, full // self.divisor)

    def random_rational(self, max_den: int = 10**4) -> Fraction:
        q = self.rng.randint(2, max_den)
        return Fraction(self.rng.randint(1, q - 1), q)


def check_dyadic_formula(ctx: SelftestContext) -> Tuple[bool, str]:
    top = 8 if ctx.quick else 12
    cases = 0
    for m in range(top + 1):
        for k in range((1 << m) + 1):
            if takagi_dyadic(k, m).to_fraction() != takagi_rational(Fraction(k, 1 << m)):
                return False, f"mismatch at k={k}, m={m}"
            cases += 1
    return True, f"{cases} cases, m <= {top}"


def check_powers_of_two(ctx: SelftestContext) -> Tuple[bool, str]:
    for j in range(1, 65):
        if takagi_dyadic(1, j) != Dyadic(j, j):
            return False, f"T(2^-{j}) != {j}/2^{j}"
    return True, "j = 1..64"


def check_kruppel_identity(ctx: SelftestContext) -> Tuple[bool, str]:
    top = 3 if ctx.quick else 5
    for n in range(1, top + 1):
        slope = kruppel_window_slope(n, bit_budget=ctx.config.limits.bit_budget)
        if slope != 7 - 6 * n:
            return False, f"n={n}: {slope} != {7 - 6 * n}"
    return True, f"n = 1..{top}"


def check_interval_slopes(ctx: SelftestContext) -> Tuple[bool, str]:
    total = ctx.cases(ctx.config.selftest.slope_cases)
    done = 0
    while done < total:
        x = expansion_of_rational(ctx.random_rational())
        m = ctx.rng.randint(1, 200)
        end = x.terminates_at()
        if end is not None and m >= end:
            continue
        if dyadic_interval_slope(x, m) != deficiency(x, m):
            return False, f"{x.describe()}, m={m}"
        done += 1
    return True, f"{total} cases"


def check_kono_identity(ctx: SelftestContext) -> Tuple[bool, str]:
    total = ctx.cases(ctx.config.selftest.kono_cases)
    depth = ctx.config.kono.depth_floor
    done = 0
    widest = Dyadic(0)
    while done < total:
        x = expansion_of_rational(ctx.random_rational())
        p = ctx.rng.randint(1, 60)
        h = None
        if ctx.rng.random() < 0.5:
            e = ctx.rng.randint(1, 10)
            h = Dyadic((1 << e) + ctx.rng.randint(1, 1 << e), p + 1 + e)
        try:
            split = kono_split(x, p, depth, h=h)
        except ExpansionOverflowError:
            continue
        if not split.identity_holds():
            return False, f"identity fails at {x.describe()}, p={p}"
        if split.total.width() > Dyadic.pow2(-(depth - 2)):
            return False, f"width {split.total.width()} at {x.describe()}, p={p}"
        if split.sigma3.magnitude() > 2 * split.h:
            return False, f"|Sigma3| > 2h at {x.describe()}, p={p}"
        widest = max(widest, split.total.width())
        done += 1
    return True, f"{total} cases, widest {float(widest):.3e}"


def check_key_inequality(ctx: SelftestContext) -> Tuple[bool, str]:
    total = ctx.cases(ctx.config.selftest.key_inequality_cases)
    done = 0
    lower_checks = 0
    while done < total:
        x = expansion_of_rational(ctx.random_rational())
        p = ctx.rng.randint(1, 60)
        try:
            factor = sigma2_factor(x, p)
        except ExpansionOverflowError:
            continue
        h = Dyadic.pow2(-p)
        if factor.lo > h:
            return False, f"factor above h at {x.describe()}, p={p}"
        for m in range(21):
            if x.digit(p + m + 1) == 0:
                lower_checks += 1
                if factor.hi < -h * (1 - Dyadic.pow2(-m)):
                    return False, f"factor below -h(1-2^-{m}) at {x.describe()}, p={p}"
        done += 1
    return True, f"{total} cases, {lower_checks} lower-bound checks"


def check_maximizer_bracket(ctx: SelftestContext) -> Tuple[bool, str]:
    top = ctx.config.selftest.maximize_limit
    top = max(1, top >> 4) if ctx.quick else top
    for c in range(1, top + 1):
        if not maximize_f(c).bracket_holds():
            return False, f"bracket fails at c={c}"
    return True, f"c = 1..{top}"


def check_condition_closed_forms(ctx: SelftestContext) -> Tuple[bool, str]:
    linear = condition_sequence(builtin_generator("linear", (3,)), 60)
    shifted = condition_sequence(builtin_generator("pow2plus", (1,)), 60)
    for s in linear:
        if abs(s.c_n - (3 - s.n - math.log2(3))) > 1e-12:
            return False, f"a_n = 3n at n={s.n}: {s.c_n}"
    for s in shifted:
        if abs(s.c_n - (s.n + 1 - math.log2(2**s.n + 1))) > 1e-12:
            return False, f"a_n = 2^n + n at n={s.n}: {s.c_n}"
    return True, "n <= 60 for 3n and 2^n + n"


def check_modulus_envelopes(ctx: SelftestContext) -> Tuple[bool, str]:
    grid = (32, 64, 128, 256)
    for m in range(1, 9):
        for k in range(1, 1 << m, 2):
            x = Fraction(k, 1 << m)
            for j in grid:
                for h in (Dyadic.pow2(-j), -Dyadic.pow2(-j)):
                    ratio = scaled_quotient(x, h)
                    if abs(ratio - 1) > (2 * m + 4) / j:
                        return False, f"x={x}, h={h}: {ratio}"
    for x, limit, bound in ((Fraction(1, 3), 0.0, 8), (Fraction(1, 7), 1 / 3, 10)):
        for j in grid:
            ratio = scaled_quotient(x, Dyadic.pow2(-j))
            if abs(ratio - limit) > bound / j:
                return False, f"x={x}, j={j}: {ratio}"
    return True, "dyadic m <= 8, 1/3 and 1/7 on j in 32..256"


def check_nonconvergence_witness(ctx: SelftestContext) -> Tuple[bool, str]:
    count = 4 if ctx.quick else 6
    x = parse_expansion_spec("cogaps:kruppel", ctx.config.limits.bit_budget)
    zeros = modulus_experiment(x, "zeros", count).points[-1].ratio
    window = modulus_experiment(x, "kono_window", count).points[-1].ratio
    ok = zeros <= -0.9 and window >= -0.7
    return ok, f"n={count}: zeros {zeros:.4f}, kono_window {window:.4f}"


def check_normalmix(ctx: SelftestContext) -> Tuple[bool, str]:
    top = 1000 if ctx.quick else 10**4
    g = builtin_generator("normalmix")
    if g.prefix(8) != (3, 5, 7, 9, 14, 15, 16, 20):
        return False, f"prefix {g.prefix(8)}"
    for n, a in enumerate(g.prefix(top), start=1):
        r = math.isqrt(n)
        if not 2 * n + r - 1 <= a <= 2 * n + 3 * r:
            return False, f"a_{n} = {a} outside bounds"
    return True, f"n <= {top}"


CHECKS: List[Tuple[str, CheckFn]] = [
    ("dyadic formula vs orbit sum", check_dyadic_formula),
    ("T(2^-j) = j 2^-j", check_powers_of_two),
    ("Kruppel window slope = 7 - 6n", check_kruppel_identity),
    ("dyadic interval slope = D_m", check_interval_slopes),
    ("decomposition identity", check_kono_identity),
    ("carry factor bounds", check_key_inequality),
    ("maximizer bracket", check_maximizer_bracket),
    ("condition closed forms", check_condition_closed_forms),
    ("modulus envelopes", check_modulus_envelopes),
    ("nonconvergence witness", check_nonconvergence_witness),
    ("normalmix bounds", check_normalmix),
]


def run_selftest(config: LabConfig, quick: bool = False, seed: Optional[int] = None,
                 echo: Callable[[str], None] = lambda line: None) -> List[CheckResult]:
    """
    Run every acceptance check.

    Args:
        config: lab configuration (case counts, seed, limits)
        quick: scale case counts down
        seed: overrides selftest.seed
        echo: receives the human-readable summary lines

    Returns:
        One CheckResult per check; a check that raises counts as failed
    """
    ctx = SelftestContext(config, quick, seed)
    results = []
    for name, check in CHECKS:
        started = time.perf_counter()
        try:
            passed, detail = check(ctx)
        except Exception as e:
            logger.exception(f"Check {name} raised")
            passed, detail = False, f"error: {e}"
        results.append(CheckResult(name=name, passed=passed, detail=detail,
                                   seconds=time.perf_counter() - started))

    echo("=" * 50)
    echo("SELFTEST SUMMARY")
    echo("=" * 50)
    for r in results:
        echo(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    passed = sum(r.passed for r in results)
    echo(f"\nPassed: {passed}/{len(results)} checks (seed {ctx.seed}{', quick' if quick else ''})")
    return results

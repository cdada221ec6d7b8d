from fractions import Fraction

import pytest

from src.errors import AllOnesPrefixError, DomainError, ExpansionOverflowError, InconsistentCarryError
from src.exact_core import Dyadic
from src.expansion import expansion_of_rational
from src.expansion_spec import parse_expansion_spec
from src.kono import (
    adversarial_step,
    default_depth,
    kono_split,
    maximize_f,
    middle_sum,
    sigma2_factor,
    sigma3_double_sum,
    step_exponent,
)
from src.takagi import takagi_rational


def test_split_at_one_third():
    split = kono_split(expansion_of_rational(Fraction(1, 3)), p=3)
    assert split.k0 == 2
    assert split.sigma1 == 0
    assert split.middle == 1
    assert split.sigma2.contains(Fraction(-1, 24))
    assert split.sigma3.lo == split.sigma3.hi == 0
    assert split.reference_delta == Fraction(-1, 24)
    assert takagi_rational(Fraction(11, 24)) == Fraction(5, 8)
    assert split.identity_holds()
    assert split.depth == 80


def test_split_identity_on_random_rationals(random_rational, rng):
    done = 0
    while done < 150:
        x = expansion_of_rational(random_rational())
        p = rng.randint(1, 40)
        try:
            split = kono_split(x, p)
        except ExpansionOverflowError:
            continue
        assert split.identity_holds()
        assert split.total.width() <= Dyadic.pow2(-78)
        assert split.sigma3.magnitude() <= 2 * split.h
        done += 1


def test_split_with_general_step():
    x = expansion_of_rational(Fraction(1, 3))
    h = Dyadic(3, 5)
    assert step_exponent(h) == 3
    split = kono_split(x, h=h)
    assert (split.p, split.k0) == (3, 2)
    assert split.h == h
    assert split.identity_holds()


def test_split_identity_with_random_general_steps(random_rational, rng):
    done = 0
    nonzero_tail = 0
    while done < 200:
        x = expansion_of_rational(random_rational())
        p = rng.randint(1, 30)
        e = rng.randint(1, 10)
        # 2^-(p+1) < h <= 2^-p
        h = Dyadic((1 << e) + rng.randint(1, 1 << e), p + 1 + e)
        try:
            split = kono_split(x, h=h)
        except ExpansionOverflowError:
            continue
        assert split.p == p
        assert split.identity_holds()
        assert split.sigma3.magnitude() <= 2 * h
        if split.sigma3.magnitude() > 0:
            nonzero_tail += 1
        done += 1
    assert nonzero_tail > 100


def test_general_step_needs_rational_point():
    with pytest.raises(DomainError):
        kono_split(parse_expansion_spec("gaps:kruppel"), h=Dyadic(3, 5))


def test_split_on_rule_point_has_zero_tail():
    split = kono_split(parse_expansion_spec("gaps:kruppel"), p=10)
    assert split.reference_delta is None
    assert split.identity_holds() is None
    assert split.sigma3.lo == split.sigma3.hi == 0
    assert split.k0 == 9
    assert split.sigma1 == Dyadic(7, 10)


def test_split_errors():
    with pytest.raises(ExpansionOverflowError):
        kono_split(expansion_of_rational(Fraction(7, 8)), p=3)
    with pytest.raises(AllOnesPrefixError):
        kono_split(parse_expansion_spec("cogaps:kruppel"), p=3)
    with pytest.raises(DomainError):
        kono_split(expansion_of_rational(Fraction(1, 3)), p=0)
    with pytest.raises(DomainError):
        step_exponent(Dyadic(3, 2))


def test_middle_sum():
    assert middle_sum(expansion_of_rational(Fraction(1, 3)), 2, 4) == 0
    assert middle_sum(expansion_of_rational(Fraction(1, 3)), 2, 3) == 1
    assert middle_sum(parse_expansion_spec("cogaps:kruppel"), 3, 15) == -10


def test_middle_sum_rejects_non_carry_pattern():
    with pytest.raises(InconsistentCarryError):
        middle_sum(expansion_of_rational(Fraction(1, 3)), 0, 4)
    with pytest.raises(InconsistentCarryError):
        middle_sum(expansion_of_rational(Fraction(1, 3)), 4, 4)


def test_carry_factor_bounds(random_rational, rng):
    done = 0
    while done < 150:
        x = expansion_of_rational(random_rational())
        p = rng.randint(1, 40)
        try:
            factor = sigma2_factor(x, p)
        except ExpansionOverflowError:
            continue
        h = Dyadic.pow2(-p)
        assert factor.lo <= h
        for m in range(12):
            if x.digit(p + m + 1) == 0:
                assert factor.hi >= -h * (1 - Dyadic.pow2(-m))
        done += 1


def test_carry_factor_truncated_for_rule_point():
    factor = sigma2_factor(parse_expansion_spec("gaps:linear:3"), 4, depth=40)
    assert factor.width() == Dyadic.pow2(-39)
    assert factor.lo <= Dyadic.pow2(-4)


def test_double_sum_encloses_exact_tail():
    x = expansion_of_rational(Fraction(1, 3))
    shifted = expansion_of_rational(Fraction(41, 96))
    approx = sigma3_double_sum(x, shifted, 3, 40)
    exact = Fraction(1, 8) * (takagi_rational(Fraction(5, 12)) - takagi_rational(Fraction(2, 3)))
    assert approx.contains(exact)
    assert approx.width() == Dyadic(2 * 38, 40)


def test_maximize_f_small_cases():
    four = maximize_f(4)
    assert four.mstar == 2
    assert four.fvalues[2] == Fraction(3, 2)
    assert four.fvalues[1] == four.fvalues[2]
    one = maximize_f(1)
    assert one.mstar == 1
    assert one.fvalues == [0, 0]


def test_maximize_f_matches_brute_force():
    for c in range(1, 300):
        values = [(1 - Fraction(1, 1 << m)) * (c - m) for m in range(c + 1)]
        best = max(values)
        expected = max(m for m, v in enumerate(values) if v == best)
        report = maximize_f(c)
        assert report.mstar == expected
        assert report.bracket_holds()


def test_maximize_f_large_c():
    report = maximize_f(1 << 20)
    assert report.mstar == 19
    assert report.bracket_holds()
    with pytest.raises(DomainError):
        maximize_f(0)


def test_adversarial_step():
    zeros = (4, 16, 64, 256, 1024)
    assert adversarial_step(zeros, 4) == (1015, 9)
    assert adversarial_step(zeros, 1) == (16 - maximize_f(12).mstar, maximize_f(12).mstar)


def test_default_depth():
    assert default_depth(3) == 80
    assert default_depth(100) == 200

from fractions import Fraction

import pytest

from src.errors import DomainError
from src.exact_core import Dyadic, Interval
from src.expansion import GapRuleExpansion, ZEROS, expansion_of_rational
from src.expansion_spec import parse_expansion_spec
from src.takagi import (
    takagi_dyadic,
    takagi_enclosure,
    takagi_of_dyadic,
    takagi_partial,
    takagi_rational,
    tent_iterate,
    tent_orbit,
)
from src.gap_generators import builtin_generator


def test_known_values():
    assert takagi_rational(Fraction(1, 3)) == Fraction(2, 3)
    assert takagi_dyadic(1, 2) == Dyadic(1, 1)
    assert takagi_dyadic(1, 1) == Dyadic(1, 1)
    assert takagi_dyadic(0, 5) == 0
    assert takagi_dyadic(32, 5) == 0


def test_powers_of_two():
    # T(2^-m) = m 2^-m
    for m in range(1, 200):
        assert takagi_dyadic(1, m) == Dyadic(m, m)


def test_dyadic_and_rational_paths_agree():
    for m in range(0, 13):
        for k in range(0, (1 << m) + 1):
            assert takagi_dyadic(k, m).to_fraction() == takagi_rational(Fraction(k, 1 << m))


def test_symmetry_and_self_similarity(random_rational):
    for _ in range(100):
        x = random_rational(500)
        t = takagi_rational(x)
        assert takagi_rational(1 - x) == t
        assert takagi_rational(x / 2) == x / 2 + t / 2


def test_rational_matches_series_partial_sums():
    x = Fraction(3, 7)
    total = sum(Fraction(1, 1 << n) * tent_iterate(x, n) for n in range(1, 60))
    assert 0 <= takagi_rational(x) - total <= Fraction(1, 1 << 59)


def test_out_of_domain():
    with pytest.raises(DomainError):
        takagi_rational(Fraction(3, 2))
    with pytest.raises(DomainError):
        takagi_dyadic(5, 2)
    with pytest.raises(DomainError):
        tent_iterate(Fraction(-1, 2), 1)


def test_tent_orbit():
    trace = tent_orbit(Fraction(1, 3))
    assert trace.points == [Fraction(1, 3), Fraction(2, 3)]
    assert (trace.preperiod_len, trace.cycle_len) == (1, 1)
    assert tent_iterate(Fraction(1, 3), 2) == Fraction(2, 3)
    assert tent_iterate(Fraction(1, 3), 0) == Fraction(1, 3)


def test_partial_sums():
    assert takagi_partial(Dyadic(1, 3), 1) == Dyadic(1, 3)
    assert takagi_partial(Dyadic(1, 3), 3) == takagi_of_dyadic(Dyadic(1, 3))
    for n in range(1, 8):
        y = Dyadic(45, 7)
        direct = sum(Fraction(1, 1 << j) * tent_iterate(y.to_fraction(), j) for j in range(1, n + 1))
        assert takagi_partial(y, n).to_fraction() == direct


@pytest.mark.parametrize("n_terms", [20, 40, 60])
def test_enclosure_contains_rational_values(random_rational, n_terms):
    bound = Dyadic(n_terms, 2 * n_terms) + Dyadic.pow2(-n_terms)
    for _ in range(200):
        r = random_rational(1000)
        box = takagi_enclosure(expansion_of_rational(r), n_terms)
        assert box.contains(takagi_rational(r))
        assert box.width() <= bound


def test_enclosure_width_at_one_third():
    box = takagi_enclosure(expansion_of_rational(Fraction(1, 3)), 40)
    assert box.contains(Fraction(2, 3))
    assert box.width() <= Dyadic(41, 80) + Dyadic.pow2(-40)


def test_enclosure_with_shallow_depth(random_rational):
    for _ in range(50):
        r = random_rational(1000)
        box = takagi_enclosure(expansion_of_rational(r), 20, depth=12)
        assert box.contains(takagi_rational(r))
        assert box.width() <= Dyadic(40, 12) + Dyadic.pow2(-20)


def test_enclosure_of_short_dyadic_is_exact():
    box = takagi_enclosure(expansion_of_rational(Fraction(5, 32)), 10)
    assert box == Interval.point(takagi_dyadic(5, 5))


def test_enclosure_width_for_rule_point():
    x = parse_expansion_spec("gaps:kruppel")
    box = takagi_enclosure(x, 40)
    assert box.width() <= Dyadic.pow2(-38)
    # reflection leaves T unchanged
    mirrored = takagi_enclosure(GapRuleExpansion(builtin_generator("kruppel"), ZEROS), 40)
    assert box.lo <= mirrored.hi and mirrored.lo <= box.hi

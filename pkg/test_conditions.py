import math
from fractions import Fraction

import pytest

from src.conditions import (
    TrendClassifier,
    begle_ayres_sequence,
    bounded_zero_run_check,
    classify_point,
    classify_trend,
    condition_sequence,
    density_corollary,
    dyadic_interval_slope,
    kruppel_slope_closed_form,
    kruppel_window_slope,
    ratio_limsup_window,
    sufficient_check,
)
from src.exact_core import is_power_of_two
from src.errors import BitBudgetExceededError, DomainError, InsufficientSamplesError
from src.expansion import deficiency, expansion_of_rational
from src.expansion_spec import parse_expansion_spec
from src.gap_generators import GapSequence, builtin_generator


def test_condition_sequence_linear():
    samples = condition_sequence(builtin_generator("linear", ("3",)), 5)
    assert [s.exact_part for s in samples] == [2, 1, 0, -1, -2]
    assert samples[0].c_n == pytest.approx(2 - math.log2(3))
    assert samples[4].c_n == pytest.approx(-2 - math.log2(3))
    assert samples[0].ratio == Fraction(2)
    assert samples[2].begle_ayres == 3


def test_condition_sequence_kruppel_closed_form():
    samples = condition_sequence(builtin_generator("kruppel"), 5)
    for s in samples:
        assert s.exact_part == 2 * 4**s.n + 2 * s.n
        assert s.c_n == pytest.approx(2 * 4**s.n + 2 * s.n - math.log2(3 * 4**s.n))


def test_begle_ayres_sequences():
    assert begle_ayres_sequence(builtin_generator("linear", ("3",)), 4) == [1, 2, 3, 4]
    assert begle_ayres_sequence(builtin_generator("kruppel"), 3) == [2, 12, 58]


def test_condition_plus_begle_ayres_is_nonnegative():
    # c_n + (a_n - 2n) = g - log2 g for the gap g
    for name, params in (("primes", ()), ("normalmix", ()), ("geo", ("1.5",)), ("sqrtdrift", ())):
        for s in condition_sequence(builtin_generator(name, params), 60):
            assert s.c_n + s.begle_ayres >= -1e-9


def test_sufficient_check():
    assert sufficient_check(builtin_generator("primes"), 200).satisfied_empirically
    assert sufficient_check(builtin_generator("geo", ("1.5",)), 40).satisfied_empirically
    doubling = sufficient_check(builtin_generator("kruppel", ("2",)), 20)
    assert not doubling.satisfied_empirically
    assert doubling.epsilon is None
    with pytest.raises(InsufficientSamplesError):
        sufficient_check(builtin_generator("primes"), 9)


def test_classify_trend_examples():
    def cn(name, params, N):
        return [s.c_n for s in condition_sequence(builtin_generator(name, params), N)]

    assert classify_trend(cn("linear", ("3",), 200), 100).verdict == "diverges_minus"
    assert classify_trend(cn("kruppel", (), 20), 10).verdict == "diverges_plus"
    assert classify_trend(cn("pow2plus", ("1",), 60), 30).verdict == "bounded"


def test_classify_trend_huge_values():
    report = classify_trend([1, 2, 10**400], 3)
    assert report.verdict == "diverges_plus"
    assert math.isinf(report.last_values[-1])


def test_classify_trend_inconclusive_and_window_checks():
    wobble = [(-1) ** n * 20.0 for n in range(50)]
    assert TrendClassifier().classify(wobble, 21).verdict == "inconclusive"
    with pytest.raises(InsufficientSamplesError):
        classify_trend([1.0, 2.0], 3)
    with pytest.raises(InsufficientSamplesError):
        classify_trend([1.0, 2.0], 1)


def test_kruppel_window_slopes():
    assert [kruppel_window_slope(n) for n in (1, 2, 3)] == [1, -5, -11]
    assert kruppel_slope_closed_form(3) == -11
    for n in range(1, 5):
        assert kruppel_window_slope(n, base=2) == kruppel_slope_closed_form(n, base=2)
    assert kruppel_window_slope(1, base=2) == 5
    for n in range(1, 3):
        assert kruppel_window_slope(n, base=3) == kruppel_slope_closed_form(n, base=3)


def test_kruppel_window_slope_respects_bit_budget():
    with pytest.raises(BitBudgetExceededError):
        kruppel_window_slope(3, bit_budget=100)
    with pytest.raises(DomainError):
        kruppel_window_slope(0)


def test_dyadic_interval_slope_is_deficiency(random_rational):
    assert dyadic_interval_slope(expansion_of_rational(Fraction(1, 3)), 4) == 0
    for _ in range(40):
        r = random_rational(3000)
        if is_power_of_two(r.denominator):
            continue
        x = expansion_of_rational(r)
        for m in (1, 5, 17, 30):
            assert dyadic_interval_slope(x, m) == deficiency(x, m)


def test_dyadic_interval_slope_at_endpoint():
    x = expansion_of_rational(Fraction(1, 4))
    assert dyadic_interval_slope(x, 1) == 1
    with pytest.raises(DomainError):
        dyadic_interval_slope(x, 2)


def test_classify_point_linear():
    report = classify_point(parse_expansion_spec("gaps:linear:3"), 200, 100)
    assert report.verdict == "plus_infinity"
    assert report.left_plus_infinity
    assert report.right_plus_infinity
    assert report.conditions["ones_condition"].verdict == "diverges_minus"


def test_classify_point_kruppel_is_one_sided():
    report = classify_point(parse_expansion_spec("gaps:kruppel"), 30, 10)
    assert report.right_plus_infinity
    assert not report.left_plus_infinity
    assert report.conditions["ones_condition"].verdict == "diverges_plus"
    assert report.verdict == "not_infinite"


def test_classify_point_past_float_range():
    x = parse_expansion_spec("gaps:kruppel")
    report = classify_point(x, 520, 100)
    assert report.conditions["ones_condition"].verdict == "diverges_plus"
    assert report.right_plus_infinity
    assert report.verdict == "not_infinite"
    last = condition_sequence(builtin_generator("kruppel"), 520)[-1]
    assert last.exact_part == 2 * 4**520 + 2 * 520
    assert math.isinf(last.c_n)


def test_sufficient_check_past_float_range():
    report = sufficient_check(builtin_generator("kruppel"), 600)
    assert report.ratio_limsup_est == 4.0
    assert math.isinf(report.density_liminf_est)
    assert not report.satisfied_empirically


def test_classify_point_pow2plus():
    report = classify_point(parse_expansion_spec("gaps:pow2plus:1"), 60, 30)
    assert report.conditions["ones_condition"].verdict == "bounded"
    assert report.verdict == "not_infinite"


def test_classify_point_rejects_dyadic():
    with pytest.raises(DomainError):
        classify_point(expansion_of_rational(Fraction(3, 8)), 20, 10)


def test_bounded_zero_run_check():
    report = bounded_zero_run_check(parse_expansion_spec("gaps:linear:3"), 100, 50)
    assert report.max_run == 2
    assert report.bound_holds
    assert report.implies_infinite_derivative


def test_ratio_limsup_window():
    assert ratio_limsup_window([4]) is None
    assert ratio_limsup_window([4, 16, 64, 256]) == 4.0
    assert ratio_limsup_window([1, 3, 4, 5], fraction=0.5) == pytest.approx(5 / 4)


def test_density_corollary():
    assert density_corollary(expansion_of_rational(Fraction(1, 7)), 999).implies == "plus_infinity"
    assert density_corollary(expansion_of_rational(Fraction(6, 7)), 999).implies == "minus_infinity"
    sparse = density_corollary(parse_expansion_spec("gaps:kruppel"), 1000)
    assert sparse.implies == "inconclusive"
    assert sparse.ones_ratio_limsup == 4.0
    with pytest.raises(DomainError):
        density_corollary(expansion_of_rational(Fraction(1, 2)), 100)


def test_fast_growth_keeps_condition_bounded_below(rng):
    eps = 0.1
    sequences = [
        builtin_generator("kruppel"),
        builtin_generator("kruppel", ("3",)),
        builtin_generator("geo", ("2.5",)),
        builtin_generator("pow2plus", ("1",)),
    ]
    for _ in range(20):
        terms, value = [], rng.randint(1, 5)
        for _ in range(60):
            terms.append(value)
            if rng.random() < 0.5:
                value += rng.randint(1, 3)
            else:
                value = value * rng.randint(2, 5) + rng.randint(0, 3)
        sequences.append(GapSequence("sampled", (), lambda terms=tuple(terms): iter(terms)))

    checked = 0
    for seq in sequences:
        for s in condition_sequence(seq, 40):
            if s.ratio >= Fraction(21, 10):
                assert s.c_n >= 2 * s.n - 2 / eps - 1
                checked += 1
    assert checked > 200

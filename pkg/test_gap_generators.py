import itertools

import pytest

from src.errors import BitBudgetExceededError, GapExhaustedError, GeneratorError
from src.gap_generators import GapSequence, builtin_generator


@pytest.mark.parametrize(
    "name,params,expected",
    [
        ("linear", ("3",), (3, 6, 9, 12)),
        ("kruppel", (), (4, 16, 64, 256)),
        ("kruppel", ("2",), (2, 4, 8, 16)),
        ("poly", ("0", "1", "1"), (2, 6, 12, 20)),
        ("geo", ("1.5",), (1, 2, 3, 5)),
        ("pow2plus", ("1",), (3, 6, 11, 20)),
        ("primes", (), (2, 3, 5, 7)),
        ("sqrtdrift", (), (3, 5, 7, 10)),
        ("logdrift", (), (4, 7, 9, 12)),
    ],
)
def test_builtin_prefixes(name, params, expected):
    assert builtin_generator(name, params).prefix(4) == expected


def test_normalmix_prefix():
    assert builtin_generator("normalmix").prefix(8) == (3, 5, 7, 9, 14, 15, 16, 20)


def test_sequences_are_strictly_increasing():
    for name in ("primes", "sqrtdrift", "logdrift", "normalmix"):
        terms = builtin_generator(name).prefix(500)
        assert all(a < b for a, b in zip(terms, terms[1:]))


def test_non_monotone_parameterization_fails_lazily():
    seq = builtin_generator("poly", ("5", "-1"))
    assert seq.prefix(1) == (4,)
    with pytest.raises(GeneratorError):
        seq.term(2)


@pytest.mark.parametrize(
    "name,params",
    [
        ("nope", ()),
        ("linear", ("0",)),
        ("linear", ("1",)),
        ("linear", ()),
        ("poly", ("0", "1")),
        ("poly", ("7", "1", "0")),
        ("geo", ("1",)),
        ("kruppel", ("1",)),
        ("primes", ("2",)),
    ],
)
def test_bad_generators_rejected(name, params):
    with pytest.raises(GeneratorError):
        builtin_generator(name, params)


def test_membership_queries():
    seq = builtin_generator("linear", ("3",))
    assert seq.contains(9)
    assert not seq.contains(10)
    assert seq.count_upto(10) == 3
    assert seq.terms_upto(12) == (3, 6, 9, 12)


def test_complement_of_infinite_sequence():
    seq = builtin_generator("linear", ("3",))
    assert seq.complement().prefix(6) == (1, 2, 4, 5, 7, 8)
    assert builtin_generator("kruppel").complement().prefix(5) == (1, 2, 3, 5, 6)


def test_complement_of_finite_sequence():
    finite = GapSequence("finite", (), lambda: iter((2, 3)))
    assert finite.complement().prefix(4) == (1, 4, 5, 6)
    with pytest.raises(GapExhaustedError):
        finite.prefix(3)


def test_complement_scan_stops_at_position_limit():
    tail = GapSequence("tail", (), lambda: itertools.count(5))
    assert tail.complement(100).prefix(4) == (1, 2, 3, 4)
    with pytest.raises(BitBudgetExceededError):
        tail.complement(100).prefix(5)

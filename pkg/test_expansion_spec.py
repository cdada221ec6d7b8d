from fractions import Fraction

import pytest

from src.errors import SpecParseError
from src.expansion import ZEROS, FiniteDyadicExpansion, GapRuleExpansion, PeriodicExpansion
from src.expansion_spec import parse_expansion_spec


def test_parse_points():
    assert isinstance(parse_expansion_spec("rational:1/3"), PeriodicExpansion)
    dyadic = parse_expansion_spec("dyadic:5/32")
    assert isinstance(dyadic, FiniteDyadicExpansion)
    assert dyadic.rational_value() == Fraction(5, 32)
    # a rational with a power-of-two denominator is still dyadic
    assert parse_expansion_spec("rational:2/8").is_dyadic()


def test_parse_rules():
    x = parse_expansion_spec("gaps:kruppel")
    assert isinstance(x, GapRuleExpansion)
    assert x.sequence.prefix(2) == (4, 16)
    co = parse_expansion_spec("cogaps:linear:3")
    assert co.role == ZEROS
    assert co.digits(4) == [1, 1, 0, 1]
    assert parse_expansion_spec("gaps:poly:0,1,1").sequence.prefix(2) == (2, 6)
    assert parse_expansion_spec("gaps:geo:1.5").sequence.prefix(3) == (1, 2, 3)


@pytest.mark.parametrize("text", ["gaps:linear:1", "cogaps:linear:1", "gaps:poly:0,1", "gaps:poly:3,1"])
def test_rules_covering_a_tail_are_rejected(text):
    with pytest.raises(SpecParseError) as info:
        parse_expansion_spec(text)
    assert info.value.position == text.index(":") + 1


def test_bit_budget_is_passed_through():
    assert parse_expansion_spec("gaps:primes", bit_budget=64).bit_budget == 64


@pytest.mark.parametrize(
    "text,token,position",
    [
        ("dyadic:1/3", "3", 9),
        ("gaps:foo", "foo", 5),
        ("nonsense", "nonsense", 0),
        ("gaps:linear:x", "x", 12),
        ("rational:1/0", "0", 11),
        ("rational:4/3", "4/3", 9),
        ("points:1/2", "points", 0),
    ],
)
def test_parse_errors_name_token_and_position(text, token, position):
    with pytest.raises(SpecParseError) as err:
        parse_expansion_spec(text)
    assert err.value.token == token
    assert err.value.position == position


def test_generator_errors_become_parse_errors():
    with pytest.raises(SpecParseError):
        parse_expansion_spec("gaps:linear:0")
    with pytest.raises(SpecParseError):
        parse_expansion_spec("gaps:geo:0.5")

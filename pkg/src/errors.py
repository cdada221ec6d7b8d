"""
Errors Module

Exception hierarchy shared by the takagi-lab modules. Library code raises these;
only the CLI turns them into exit codes.
"""

from typing import Optional


class TakagiLabError(Exception):
    """Base class for every error raised by takagi-lab"""


class DomainError(TakagiLabError, ValueError):
    """An input lies outside the domain of the operation"""


class ExpansionOverflowError(TakagiLabError):
    """x + h would reach or pass 1"""


class AllOnesPrefixError(ExpansionOverflowError):
    """The first p digits are all 1, so adding 2^-p carries out of the unit interval"""


class GapExhaustedError(TakagiLabError):
    """A gap sequence was asked for more terms than the expansion has"""


class BitBudgetExceededError(TakagiLabError):
    """A digit position beyond the configured bit budget was requested"""

    def __init__(self, position: int, budget: int):
        super().__init__(f"position {position} exceeds bit budget {budget}")
        self.position = position
        self.budget = budget


class SpecParseError(TakagiLabError):
    """An expansion spec string could not be parsed"""

    def __init__(self, message: str, token: str, position: int, text: Optional[str] = None):
        super().__init__(f"{message}: {token!r} at position {position}")
        self.token = token
        self.position = position
        self.text = text


class GeneratorError(TakagiLabError):
    """Unknown generator name, bad parameters, or a non-monotone term"""


class InconsistentCarryError(TakagiLabError):
    """(k0, p) is not a carry pattern of x + 2^-p"""


class InsufficientSamplesError(TakagiLabError):
    """Not enough samples for the requested window"""

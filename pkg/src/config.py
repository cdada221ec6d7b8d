"""
Config Module

Loads data/takagi_lab.json into validated settings, after pulling a local .env into
the environment. TAKAGI_LAB_BIT_BUDGET overrides limits.bit_budget and
TAKAGI_LAB_LOG_LEVEL picks the stderr log level.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

DEFAULT_CONFIG_PATH = Path("data") / "takagi_lab.json"
BIT_BUDGET_ENV = "TAKAGI_LAB_BIT_BUDGET"
LOG_LEVEL_ENV = "TAKAGI_LAB_LOG_LEVEL"


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class EvaluationConfig(_Section):
    n_terms: int = Field(40, ge=1)
    depth_factor: int = Field(2, ge=1)


class KonoConfig(_Section):
    depth_floor: int = Field(80, ge=1)


class TrendConfig(_Section):
    theta: float = Field(0.05, gt=0)
    bound: float = Field(10.0, gt=0)
    horizon: int = Field(200, ge=2)
    window: int = Field(100, ge=2)


class DensityConfig(_Section):
    tolerance: float = Field(0.01, gt=0, lt=0.5)
    ratio_tolerance: float = Field(0.1, gt=0)
    window_fraction: float = Field(0.5, gt=0, le=1)
    horizon: int = Field(4096, ge=1)


class LimitsConfig(_Section):
    bit_budget: int = Field(1 << 20, ge=1)


class OutputConfig(_Section):
    format: Literal["csv", "json"] = "json"


class SelftestConfig(_Section):
    seed: int = 20240601
    kono_cases: int = Field(1000, ge=1)
    key_inequality_cases: int = Field(1000, ge=1)
    slope_cases: int = Field(300, ge=1)
    maximize_limit: int = Field(1 << 16, ge=1)
    quick_divisor: int = Field(10, ge=1)


class LabConfig(_Section):
    """All tunable defaults, one section per concern"""

    evaluation: EvaluationConfig = EvaluationConfig()
    kono: KonoConfig = KonoConfig()
    trend: TrendConfig = TrendConfig()
    density: DensityConfig = DensityConfig()
    limits: LimitsConfig = LimitsConfig()
    output: OutputConfig = OutputConfig()
    selftest: SelftestConfig = SelftestConfig()


class RunConfig(BaseModel):
    """Effective settings of one CLI invocation, echoed with JSON output"""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    flags: Dict[str, Any] = {}
    output_format: Literal["csv", "json"] = "json"
    seed: Optional[int] = None
    bit_budget: int = 1 << 20


def load_config(path: Union[str, Path, None] = None) -> LabConfig:
    """
    Read the lab configuration.

    Args:
        path: JSON file; defaults to data/takagi_lab.json. A missing file gives the
              built-in defaults.

    Returns:
        Validated LabConfig with environment overrides applied
    """
    load_dotenv()
    path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    data: Dict[str, Any] = {}
    if path.exists():
        with open(path, "r") as f:
            data = json.load(f)
        logger.debug(f"Loaded configuration from {path}")
    else:
        logger.debug(f"No configuration at {path}, using defaults")

    budget = os.getenv(BIT_BUDGET_ENV)
    if budget:
        data.setdefault("limits", {})
        data["limits"] = {**data["limits"], "bit_budget": int(budget)}
    return LabConfig.model_validate(data)


def log_level() -> str:
    return os.getenv(LOG_LEVEL_ENV, "WARNING").upper()

"""
Runtime settings and curve documents for specrec.

Engine settings come from the process environment, optionally seeded from a
.env file. Curve documents are JSON or TOML files describing x and y.

Recognised variables:
    SPECREC_TRUNC_ORDER   series truncation order (default: 6*gmax + 8)
    SPECREC_MAX_N         largest n accepted by the TR engine (default: 4)
    SPECREC_MAX_WEIGHT    largest 2g+n-2 accepted by the TR engine (default: 8)
    SPECREC_LOG_LEVEL     logging level name (default: WARNING)

Requires:
    pip install pydantic python-dotenv tomli
"""
import json
import os
from fractions import Fraction
from pathlib import Path
from typing import List, Literal, Optional, Union

import dotenv
import tomli
from pydantic import BaseModel, Field, field_validator, model_validator

from errors import CurveValidationError

dotenv.load_dotenv()


class EngineSettings(BaseModel):
    trunc_order: Optional[int] = Field(default=None, ge=4)
    max_n: int = Field(default=4, ge=1)
    max_weight: int = Field(default=8, ge=1)
    log_level: str = "WARNING"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value}")
        return value

    def truncation_for(self, g_max: int) -> int:
        """Truncation order used for a computation that reaches genus g_max."""
        if self.trunc_order is not None:
            return self.trunc_order
        return default_truncation(g_max)


def default_truncation(g_max: int) -> int:
    return 6 * max(g_max, 1) + 8


def load_settings() -> EngineSettings:
    """
    Build settings from the environment.

    Raises:
        pydantic.ValidationError: If a variable holds an invalid value.
    """
    raw = {
        "trunc_order": os.getenv("SPECREC_TRUNC_ORDER") or None,
        "max_n": os.getenv("SPECREC_MAX_N") or 4,
        "max_weight": os.getenv("SPECREC_MAX_WEIGHT") or 8,
        "log_level": os.getenv("SPECREC_LOG_LEVEL") or "WARNING",
    }
    return EngineSettings.model_validate(raw)


# ---------------------------------------------------------------------------
# Curve documents
# ---------------------------------------------------------------------------

RationalText = Union[int, str]


def _check_rational(value: RationalText) -> str:
    try:
        return str(Fraction(str(value).strip()))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"{value!r} is not an exact rational 'p/q'") from e


class RationalConfig(BaseModel):
    num: List[RationalText]
    den: List[RationalText] = Field(default_factory=lambda: ["1"])

    @field_validator("num", "den")
    @classmethod
    def _rationals(cls, values: List[RationalText]) -> List[str]:
        return [_check_rational(v) for v in values]

    @field_validator("den")
    @classmethod
    def _nonzero_den(cls, values: List[str]) -> List[str]:
        if all(Fraction(v) == 0 for v in values):
            raise ValueError("denominator polynomial is zero")
        return values


class LogAtomConfig(BaseModel):
    a: RationalText
    coeff: RationalText

    @field_validator("a", "coeff")
    @classmethod
    def _rational(cls, value: RationalText) -> str:
        return _check_rational(value)

    @field_validator("coeff")
    @classmethod
    def _nonzero(cls, value: str) -> str:
        if Fraction(value) == 0:
            raise ValueError("log atom coefficient must be nonzero")
        return value


class LogConstantConfig(BaseModel):
    arg: RationalText
    coeff: RationalText

    @field_validator("arg", "coeff")
    @classmethod
    def _rational(cls, value: RationalText) -> str:
        return _check_rational(value)


class FunctionConfig(BaseModel):
    kind: Optional[Literal["log_z"]] = None
    rational: Optional[RationalConfig] = None
    logs: List[LogAtomConfig] = Field(default_factory=list)
    log_constants: List[LogConstantConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shape(self) -> "FunctionConfig":
        if self.kind == "log_z" and (self.rational is not None or self.logs):
            raise ValueError("kind 'log_z' takes no rational part and no logs")
        if self.kind is None and self.rational is None and not self.logs:
            raise ValueError("function needs a rational part, logs or kind 'log_z'")
        return self


class CurveConfig(BaseModel):
    label: str = "curve"
    x: FunctionConfig
    y: FunctionConfig
    framing: int = 0


def load_curve_document(path: Union[str, Path]) -> CurveConfig:
    """
    Read a curve document from a .json or .toml file.

    Raises:
        CurveValidationError: If the file is unreadable or not valid JSON/TOML.
        pydantic.ValidationError: If the document violates the schema.
    """
    path = Path(path)
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as f:
                raw = tomli.load(f)
        else:
            with open(path, "r") as f:
                raw = json.load(f)
    except (OSError, json.JSONDecodeError, tomli.TOMLDecodeError) as e:
        raise CurveValidationError(f"cannot read curve document {path}: {e}") from e
    return CurveConfig.model_validate(raw)

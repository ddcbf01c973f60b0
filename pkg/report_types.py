"""
Report records written by the command-line front end.

Rationals are stored as canonical "p/q" strings, so identical inputs serialize to
byte-identical JSON. Path outcomes that are not numbers use the markers below.

Requires:
    pip install pydantic
"""
import csv
import io
import json
from fractions import Fraction
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field

PATH_UNAVAILABLE = "PATH_UNAVAILABLE"
UNSUPPORTED_DUAL = "UNSUPPORTED_DUAL"
NONE = "NONE"

_MARKERS = {PATH_UNAVAILABLE, UNSUPPORTED_DUAL, NONE}


def rational_text(value: Union[Fraction, int, str]) -> str:
    if isinstance(value, str):
        return value
    return str(Fraction(value))


class FreeEnergyRow(BaseModel):
    g: int
    tr_value: Optional[str] = None
    duality_value: Optional[str] = None
    closed_form: Optional[str] = None
    agree: bool = True

    def values(self) -> List[str]:
        """Numeric entries that were computed."""
        return [v for v in (self.tr_value, self.duality_value, self.closed_form) if v is not None and v not in _MARKERS]

    def settle(self) -> "FreeEnergyRow":
        self.agree = len({Fraction(v) for v in self.values()}) <= 1
        return self


class FreeEnergyReport(BaseModel):
    curve_label: str
    fingerprint: str
    method: str
    rows: List[FreeEnergyRow] = Field(default_factory=list)
    timing_ms: Dict[str, float] = Field(default_factory=dict)
    metadata: Dict[str, str] = Field(default_factory=dict)

    @property
    def all_agree(self) -> bool:
        return all(row.agree for row in self.rows)


class VerificationRecord(BaseModel):
    suite: str
    identity: str
    parameters: Dict[str, str] = Field(default_factory=dict)
    passed: bool
    details: Dict[str, str] = Field(default_factory=dict)


class VerificationReport(BaseModel):
    records: List[VerificationRecord] = Field(default_factory=list)
    verdicts: Dict[str, str] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records) and "inconsistent" not in self.verdicts.values()


class OmegaTerm(BaseModel):
    points: List[str]
    orders: List[int]
    coeff: str


class OmegaDump(BaseModel):
    curve_label: str
    g: int
    n: int
    bergman: bool = False
    terms: List[OmegaTerm] = Field(default_factory=list)


def to_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(), indent=2, sort_keys=True)


def _table(rows: List[dict]) -> List[List[str]]:
    if not rows:
        return []
    header = list(rows[0].keys())
    body = [[_cell(row.get(k)) for k in header] for row in rows]
    return [header] + body


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def to_csv(rows: List[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(_table(rows))
    return buffer.getvalue()


def to_markdown(rows: List[dict]) -> str:
    table = _table(rows)
    if not table:
        return ""
    lines = ["| " + " | ".join(table[0]) + " |", "|" + "---|" * len(table[0])]
    lines += ["| " + " | ".join(r) + " |" for r in table[1:]]
    return "\n".join(lines) + "\n"


def render(model: BaseModel, rows: List[dict], fmt: str) -> str:
    """JSON dumps the whole model; csv and md render the given rows."""
    if fmt == "json":
        return to_json(model) + "\n"
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "md":
        return to_markdown(rows)
    raise ValueError(f"unknown output format {fmt!r}")

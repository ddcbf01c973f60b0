import json

import pytest
from pydantic import ValidationError

from config import CurveConfig, EngineSettings, default_truncation, load_curve_document, load_settings
from errors import CurveValidationError

HZ_TOML = """
label = "hz-file"
framing = 0

[x.rational]
num = [1, 0, 1]
den = [0, 1]

[y.rational]
num = ["0", "1"]
"""


def test_default_settings():
    settings = load_settings()
    assert settings == EngineSettings()
    assert settings.truncation_for(3) == default_truncation(3) == 26
    assert settings.truncation_for(0) == 14


def test_settings_from_the_environment(monkeypatch):
    monkeypatch.setenv("SPECREC_TRUNC_ORDER", "40")
    monkeypatch.setenv("SPECREC_MAX_N", "3")
    monkeypatch.setenv("SPECREC_LOG_LEVEL", "debug")
    settings = load_settings()
    assert settings.truncation_for(1) == 40
    assert settings.max_n == 3
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize("name, value", [
    ("SPECREC_TRUNC_ORDER", "2"),
    ("SPECREC_MAX_N", "many"),
    ("SPECREC_LOG_LEVEL", "LOUD"),
])
def test_invalid_settings(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValidationError):
        load_settings()


def test_load_toml_document(tmp_path):
    path = tmp_path / "hz.toml"
    path.write_text(HZ_TOML)
    doc = load_curve_document(path)
    assert doc.label == "hz-file"
    assert doc.x.rational.num == ["1", "0", "1"]
    assert doc.y.rational.den == ["1"]


def test_load_json_document(tmp_path):
    path = tmp_path / "logs.json"
    path.write_text(json.dumps({
        "x": {"logs": [{"a": "0", "coeff": 1}, {"a": "1", "coeff": "1"}],
              "log_constants": [{"arg": 2, "coeff": "1/2"}]},
        "y": {"rational": {"num": [0, 1]}},
    }))
    doc = load_curve_document(path)
    assert doc.label == "curve"
    assert [atom.a for atom in doc.x.logs] == ["0", "1"]
    assert doc.x.log_constants[0].coeff == "1/2"


def test_unreadable_documents(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(CurveValidationError):
        load_curve_document(broken)
    with pytest.raises(CurveValidationError):
        load_curve_document(tmp_path / "missing.toml")


@pytest.mark.parametrize("doc", [
    {"x": {"rational": {"num": [1], "den": [0]}}, "y": {"kind": "log_z"}},
    {"x": {"logs": [{"a": 0, "coeff": 0}]}, "y": {"kind": "log_z"}},
    {"x": {}, "y": {"kind": "log_z"}},
    {"x": {"rational": {"num": ["1/0"]}}, "y": {"kind": "log_z"}},
])
def test_schema_violations(doc):
    with pytest.raises(ValidationError):
        CurveConfig.model_validate(doc)

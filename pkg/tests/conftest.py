import pytest

from curve_catalog import catalog_get
from exact_algebra import RationalFunction
from spectral_curve import CurveFunction, make_curve
from tr_engine import clear_cache


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("SPECREC_TRUNC_ORDER", "SPECREC_MAX_N", "SPECREC_MAX_WEIGHT", "SPECREC_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture(scope="session", autouse=True)
def fresh_engines():
    clear_cache()
    yield
    clear_cache()


@pytest.fixture
def z():
    return RationalFunction.identity()


@pytest.fixture
def hz():
    return catalog_get("harer-zagier").curve


@pytest.fixture
def airy():
    return catalog_get("airy").curve


@pytest.fixture
def log_pair():
    """x = log z + log(z - 1), y = z; ramified at z = 1/2."""
    return catalog_get("log-points", {"a": "0,1"}).curve


@pytest.fixture
def log_tr_demo():
    return catalog_get("log-tr-demo").curve


@pytest.fixture
def rational_curve():
    def build(x: RationalFunction, y: RationalFunction, label: str = "test"):
        return make_curve(CurveFunction.rational(x), CurveFunction.rational(y), label)
    return build

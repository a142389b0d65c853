import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from jrfl.local_fields import LaurentScalar, LocalField, PlaceData, SplitPair

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return random.Random(20240611)


def inert(q=5, n=2):
    return PlaceData(q, n=n, kind="inert")


def split(q=5, n=2):
    return PlaceData(q, n=n, kind="split")


@st.composite
def laurent(draw, field, min_val=-2, max_val=3, max_len=4, nonzero=False):
    """Exact Laurent polynomials over ``field``."""
    coeffs = draw(st.lists(st.integers(0, field.size - 1), min_size=1 if nonzero else 0, max_size=max_len))
    if nonzero and not any(coeffs):
        coeffs[0] = 1
    val = draw(st.integers(min_val, max_val))
    return LaurentScalar(coeffs, val, None, field)


@st.composite
def local_scalar(draw, lf, **kw):
    left = draw(laurent(lf.residue, **kw))
    if not lf.split:
        return left
    return SplitPair(left, draw(laurent(lf.residue, **kw)))


seeds = st.integers(0, 2 ** 32 - 1)


def field_of(place):
    return LocalField(place)


# -- acceptance summary ------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and report.passed:
        return
    n = mark.args[0]
    ok = _CRITERIA.get(n, (True, item.name))[0] and report.passed
    _CRITERIA[n] = (ok, item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, name = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({name})")

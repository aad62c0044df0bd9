import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from freecircle.measures import CircleMeasure, FourierSeries

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"ACCEPTANCE {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


coef = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@st.composite
def real_series(draw, max_degree=8, decay=0.0):
    d = draw(st.integers(0, max_degree))
    c0 = draw(coef)
    re = draw(st.lists(coef, min_size=d, max_size=d))
    im = draw(st.lists(coef, min_size=d, max_size=d))
    c = np.array(re) + 1j * np.array(im)
    if d:
        c = c / np.arange(1, d + 1) ** decay
    full = np.concatenate([np.conj(c[::-1]), [c0], c])
    return FourierSeries(full, real_valued=True)


@st.composite
def complex_series(draw, max_degree=8):
    d = draw(st.integers(0, max_degree))
    re = draw(st.lists(coef, min_size=2 * d + 1, max_size=2 * d + 1))
    im = draw(st.lists(coef, min_size=2 * d + 1, max_size=2 * d + 1))
    return FourierSeries(np.array(re) + 1j * np.array(im))


@st.composite
def measures(draw, max_degree=6, floor=0.05):
    p = draw(real_series(max_degree, decay=1.0))
    p = p - p.mean().real
    lo = -p.min_on_grid(256)
    if lo <= 0:
        return CircleMeasure.haar()
    s = draw(st.floats(0.0, 1.0)) * (1 - floor) / lo
    return CircleMeasure.from_density(1.0 + p * s)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)

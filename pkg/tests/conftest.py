import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tiered_gaussian.core import TieredGaussianModel
from tiered_gaussian.validation import PRINTED_TABLE

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def table_model():
    """The reference six-component fixed-centre model."""
    return TieredGaussianModel.from_arrays(PRINTED_TABLE[:, 0], np.zeros(6), PRINTED_TABLE[:, 1])


def random_model(rng, n=None, span_decades=3.0, symmetric=False):
    """Widths log-uniform over ``span_decades`` decades, each peak term of order one."""
    n = int(rng.integers(1, 9)) if n is None else n
    while True:
        widths = np.sort(10.0 ** rng.uniform(-1.5, -1.5 + span_decades, n))
        if np.all(np.diff(widths) > 1e-9 * widths[1:]):
            break
    weights = widths * rng.uniform(0.2, 2.5, n)
    means = np.zeros(n) if symmetric else rng.normal(0.0, 0.5, n) * widths.min()
    return TieredGaussianModel.from_arrays(weights, means, widths, monotone_weights=False)


@st.composite
def models(draw, max_components=8, symmetric=False):
    n = draw(st.integers(1, max_components))
    widths = sorted(set(draw(st.lists(st.floats(0.03, 30.0), min_size=n, max_size=n))))
    widths = [w for i, w in enumerate(widths) if i == 0 or w > widths[i - 1] * (1 + 1e-6)]
    k = len(widths)
    amps = draw(st.lists(st.floats(0.2, 2.5), min_size=k, max_size=k))
    centre = draw(st.floats(-5.0, 5.0))
    if symmetric:
        means = [centre] * k
    else:
        offs = draw(st.lists(st.floats(-1.0, 1.0), min_size=k, max_size=k))
        means = [centre + o * widths[0] for o in offs]
    return TieredGaussianModel.from_arrays([a * w for a, w in zip(amps, widths)], means, widths,
                                           monotone_weights=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def leptokurtic():
    """Three components with widths 1:4:16 sharing a centre."""
    return TieredGaussianModel.from_arrays([0.8, 2.0, 5.0], [0.0, 0.0, 0.0], [0.5, 2.0, 8.0])


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion; returns the verdict."""
    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  [{label}] {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import strategies as st

from rpconic.jordan import AlgebraElement, ConeSpec, Lorentz, Orthant, Psd

SPECS = [
    ConeSpec.of(Orthant(4)),
    ConeSpec.of(Lorentz(5)),
    ConeSpec.of(Psd(4)),
    ConeSpec.of(Orthant(2), Lorentz(3), Psd(3)),
    ConeSpec.of(Psd(2), Psd(3), Lorentz(2)),
]


@st.composite
def cone_specs(draw):
    blocks = []
    for _ in range(draw(st.integers(1, 3))):
        kind = draw(st.sampled_from(["orthant", "lorentz", "psd"]))
        if kind == "orthant":
            blocks.append(Orthant(draw(st.integers(1, 4))))
        elif kind == "lorentz":
            blocks.append(Lorentz(draw(st.integers(2, 5))))
        else:
            blocks.append(Psd(draw(st.integers(1, 4))))
    return ConeSpec(tuple(blocks))


def elements(spec, count=1, scale=3.0):
    floats = st.floats(-scale, scale, allow_nan=False, allow_infinity=False)
    vec = st.lists(floats, min_size=spec.n, max_size=spec.n).map(lambda v: AlgebraElement(spec, np.array(v)))
    return st.tuples(*[vec] * count)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one PASS/FAIL line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])

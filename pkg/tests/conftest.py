from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from walklab.steps import StepSet, motzkin

settings.register_profile(
    "walklab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("walklab")


SMALL_SETS = {
    "m111": motzkin(1, 1, 1),
    "m211": motzkin(2, 1, 1),
    "m112": motzkin(1, 1, 2),
    "m2h3": motzkin(2, "1/2", 3),
    "five": StepSet({-2: 1, -1: 2, 0: 1, 1: 3, 2: 1}),
    "skew": StepSet({-2: "1/3", 1: "2/3", 3: "1/5"}),
    "lazy": StepSet({-1: 3, 2: 1}),
}


@pytest.fixture(params=sorted(SMALL_SETS))
def small_set(request):
    return SMALL_SETS[request.param]


weights = st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=6)


@st.composite
def step_sets(draw, max_neg=3, max_pos=3, rational=True):
    """Random valid step sets with jumps in [-max_neg, max_pos]."""
    neg = draw(st.sets(st.integers(-max_neg, -1), min_size=1, max_size=max_neg))
    pos = draw(st.sets(st.integers(1, max_pos), min_size=1, max_size=max_pos))
    zero = draw(st.booleans())
    jumps = sorted(neg | pos | ({0} if zero else set()))
    ws = [draw(weights) for _ in jumps]
    if not rational:
        ws = [float(w) for w in ws]
    return StepSet(list(zip(jumps, ws)))


@st.composite
def zero_drift_motzkin(draw):
    p = draw(st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=4))
    p0 = draw(st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4))
    return motzkin(p, p0, p)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

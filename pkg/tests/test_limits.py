import math

import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from conftest import zero_drift_motzkin
from walklab.errors import DomainError, PeriodicStepSetError, RegimeError, UnsupportedStatisticError
from walklab.kernel import kernel_roots
from walklab.limits import (
    DiscreteLargeBranch,
    Geometric,
    HalfNormal,
    Normal,
    Rayleigh,
    b_at_rho1,
    height_discrete_law,
    law_eval,
    predict,
)
from walklab.steps import StepSet, motzkin, structural_constants


def _predict(steps, stat):
    return predict(steps, structural_constants(steps), stat)


def test_zero_drift_predictions():
    s = motzkin(1, 1, 1)
    assert abs(_predict(s, "returns").sigma - math.sqrt(1.5)) < 1e-12
    assert abs(_predict(s, "height").sigma - math.sqrt(2 / 3)) < 1e-12
    assert abs(_predict(s, "signchanges").sigma - 0.5 * math.sqrt(2 / 3)) < 1e-12
    ray = _predict(s, "bridge_signchanges")
    assert isinstance(ray, Rayleigh) and abs(ray.sigma - 0.5 * math.sqrt(2 / 3)) < 1e-12


def test_positive_drift_height_is_normal():
    law = _predict(motzkin(1, 1, 2), "height")
    assert isinstance(law, Normal)
    assert law.mu == 0.25 and law.sigma2 == 11 / 16
    assert law.scaling == "centered"


def test_negative_drift_predictions():
    s = motzkin(2, 1, 1)
    ret = _predict(s, "returns")
    assert isinstance(ret, Geometric) and abs(ret.p - 0.25) < 1e-12
    sign = _predict(s, "signchanges")
    assert sign.ratio == 0.5 and sign.p == 0.5
    h = _predict(s, "height")
    assert isinstance(h, DiscreteLargeBranch)


def test_law_eval_examples():
    assert abs(law_eval(HalfNormal(1.0), "mean") - 0.797885) < 1e-6
    sigma = 0.7
    assert abs(law_eval(Rayleigh(sigma), "var") - sigma**2 * (2 - math.pi / 2)) < 1e-15
    assert abs(law_eval(Geometric(0.25), "mean") - 3) < 1e-15
    assert law_eval(Geometric(0.25), "pdf", 2) == 0.25 * 0.75**2
    assert law_eval(HalfNormal(1.0), "cdf", -1.0) == 0.0
    assert law_eval(HalfNormal(1.0), "pdf", -1.0) == 0.0
    with pytest.raises(DomainError):
        law_eval(HalfNormal(1.0), "pdf", -1.0, strict=True)
    with pytest.raises(DomainError):
        law_eval(HalfNormal(1.0), "pdf")
    with pytest.raises(DomainError):
        law_eval(HalfNormal(1.0), "median", 1.0)


CONTINUOUS = [HalfNormal(0.6), HalfNormal(1.7), Rayleigh(0.4), Rayleigh(2.0), Normal(0.3, 0.6875)]


@pytest.mark.parametrize("law", CONTINUOUS, ids=lambda l: f"{l.kind}")
def test_continuous_laws_integrate(law):
    lo = -math.inf if isinstance(law, Normal) else 0.0
    mass, _ = integrate.quad(lambda x: law.pdf(x), lo, math.inf, epsabs=1e-12, epsrel=1e-12)
    mean, _ = integrate.quad(lambda x: x * law.pdf(x), lo, math.inf, epsabs=1e-12, epsrel=1e-12)
    second, _ = integrate.quad(lambda x: x * x * law.pdf(x), lo, math.inf, epsabs=1e-12, epsrel=1e-12)
    assert abs(mass - 1) < 1e-8
    assert abs(mean - law.mean()) < 1e-8
    assert abs(second - mean**2 - law.var()) < 1e-8
    for x in (0.3, 1.0, 2.5):
        cdf, _ = integrate.quad(lambda t: law.pdf(t), lo, x, epsabs=1e-13)
        assert abs(cdf - law.cdf(x)) < 1e-8


@given(st.floats(0.01, 0.99))
def test_geometric_law_sums(p):
    g = Geometric(p)
    total = math.fsum(g.pdf(k) for k in range(5000))
    assert abs(total - 1) < 1e-8
    assert abs(g.cdf(3) - math.fsum(g.pdf(k) for k in range(4))) < 1e-12


def test_discrete_height_law_for_motzkin_211():
    s = motzkin(2, 1, 1)
    law = height_discrete_law(s, structural_constants(s), 40)
    for k, p in enumerate(law.probs):
        assert abs(p - 2.0 ** -(k + 1)) < 1e-12
    assert abs(math.fsum(law.probs) + law.tail - 1) < 1e-10


@pytest.mark.parametrize(
    "steps",
    [motzkin(2, 1, 1), motzkin(3, 1, 1), StepSet({-2: 2, -1: 1, 0: 1, 1: 1}), StepSet({-1: 5, 0: 1, 2: 1})],
)
def test_discrete_height_law_masses(steps):
    k = structural_constants(steps)
    law = height_discrete_law(steps, k, 60)
    assert all(p > -1e-12 for p in law.probs)
    assert abs(math.fsum(law.probs) + law.tail - 1) < 1e-10
    # u1(rho1) = 1 for negative drift
    roots = kernel_roots(steps, k, float(k.rho1))
    assert abs(roots.u1 - 1) < 1e-10


def test_discrete_height_law_needs_negative_drift():
    s = motzkin(1, 1, 2)
    with pytest.raises(RegimeError):
        height_discrete_law(s, structural_constants(s), 10)


def test_bridges_at_rho1():
    for w in ((2, 1, 1), (1, 1, 2)):
        s = motzkin(*w)
        assert abs(b_at_rho1(s, structural_constants(s)) - 4) < 1e-9
    s = motzkin(1, 1, 1)
    with pytest.raises(RegimeError):
        b_at_rho1(s, structural_constants(s))


motzkin_weights = st.fractions(min_value="1/3", max_value=3, max_denominator=5)


@given(motzkin_weights, motzkin_weights, motzkin_weights)
def test_motzkin_bridges_at_rho1_closed_form(pm, p0, pp):
    s = motzkin(pm, p0, pp)
    k = structural_constants(s)
    if k.drift == 0:
        return
    expected = float(s.total_weight() / abs(k.drift))
    assert abs(b_at_rho1(s, k) - expected) < 1e-9 * expected


@given(motzkin_weights, motzkin_weights, motzkin_weights)
def test_mirror_keeps_sign_change_parameter(pm, p0, pp):
    s = motzkin(pm, p0, pp)
    if pm == pp:
        return
    a, b = _predict(s, "signchanges"), _predict(s.mirrored(), "signchanges")
    assert a.p == b.p and a.ratio == b.ratio


@given(zero_drift_motzkin())
def test_zero_drift_sigma_relations(steps):
    r, h, sc = (_predict(steps, x).sigma for x in ("returns", "height", "signchanges"))
    assert abs(h - 2 * sc) < 1e-12
    assert abs(r * h - 1) < 1e-10


def test_refusals():
    with pytest.raises(PeriodicStepSetError):
        _predict(StepSet({-1: 1, 1: 1}), "returns")
    with pytest.raises(PeriodicStepSetError):
        _predict(StepSet({-2: 1, 1: 1}), "height")
    with pytest.raises(UnsupportedStatisticError):
        _predict(StepSet({-2: 1, 0: 1, 1: 1}), "signchanges")
    with pytest.raises(DomainError):
        _predict(motzkin(1, 1, 1), "area")


def test_to_dict_carries_both_geometric_numbers():
    d = _predict(motzkin(2, 1, 1), "signchanges").to_dict()
    assert d == {"law": "geometric", "params": {"p": 0.5, "ratio": 0.5}, "scaling": "none"}

import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from conftest import SMALL_SETS, step_sets
from oracle import FAMILY_NAMES, all_family_counts, brute_joint_counts, enumeration_depth, walks
from walklab.dist_exact import distribution
from walklab.errors import DomainError, PoleError, UnsupportedStatisticError
from walklab.series import (
    FAMILIES,
    bivariate_coefficients,
    coeffs,
    eval_bivariate,
    eval_gf,
    height_motzkin_closed_form,
    series_divide,
    series_multiply,
    series_reciprocal,
)
from walklab.steps import StepSet, motzkin, structural_constants

_ORACLE_CACHE = {}


def _oracle(name):
    if name not in _ORACLE_CACHE:
        steps = SMALL_SETS[name]
        _ORACLE_CACHE[name] = all_family_counts(steps, enumeration_depth(steps))
    return _ORACLE_CACHE[name]


def test_family_list_matches_oracle():
    assert tuple(FAMILIES) == FAMILY_NAMES


@pytest.mark.parametrize("name", sorted(SMALL_SETS))
def test_coefficients_equal_enumeration(name):
    steps = SMALL_SETS[name]
    expected = _oracle(name)
    n_max = len(expected["walks"]) - 1
    for family in FAMILIES:
        if family == "e1" and not steps.is_motzkin:
            continue
        got = coeffs(steps, family, n_max).coeffs
        assert list(got) == expected[family], family


def test_known_motzkin_sequences():
    s = motzkin(1, 1, 1)
    assert coeffs(s, "excursions", 6).coeffs == (1, 1, 2, 4, 9, 21, 51)
    assert coeffs(s, "bridges", 5).coeffs == (1, 1, 3, 7, 19, 51)
    assert coeffs(s, "e1", 5).coeffs == (0, 0, 1, 2, 5, 12)
    assert coeffs(s, "walks", 4).coeffs == (1, 3, 9, 27, 81)


@given(step_sets())
def test_walks_are_powers_and_nonnegative(steps):
    total = steps.total_weight()
    for family in FAMILIES:
        if family == "e1" and not steps.is_motzkin:
            continue
        table = coeffs(steps, family, 8)
        assert all(c >= 0 for c in table.coeffs)
        if family in ("bridges", "excursions"):
            assert table.coeffs[0] == 1
    assert coeffs(steps, "walks", 8).coeffs == tuple(total**n for n in range(9))


@given(step_sets())
def test_positive_and_negative_excursions_agree(steps):
    assert coeffs(steps, "excursions", 10).coeffs == coeffs(steps.mirrored(), "excursions", 10).coeffs


def test_e1_needs_motzkin():
    with pytest.raises(UnsupportedStatisticError):
        coeffs(StepSet({-2: 1, 1: 1}), "e1", 4)


def test_degenerate_e1_without_flat_step():
    s = motzkin(1, 0, 1)
    exc = coeffs(s, "excursions", 8).coeffs
    assert coeffs(s, "chains", 8).coeffs == (1, 0, 0, 0, 0, 0, 0, 0, 0)
    assert coeffs(s, "e1", 8).coeffs == tuple([exc[0] - 1] + list(exc[1:]))


def test_series_helpers_exact():
    a = [Fraction(1), Fraction(2), Fraction(3)]
    inv = series_reciprocal(a, 5)
    assert series_multiply(a, inv, 5) == [1, 0, 0, 0, 0, 0]
    b = [Fraction(1), Fraction(-1)]
    assert series_divide([Fraction(1)], b, 4) == [1, 1, 1, 1, 1]


# -- closed forms against the series -------------------------------------------------

SERIES_N = 80


def _truncated(steps, family, z, n=SERIES_N):
    cs = coeffs(steps, family, n, exact=False).coeffs
    return sum(c * z**k for k, c in enumerate(cs))


@pytest.mark.parametrize("name", sorted(SMALL_SETS))
def test_closed_forms_match_series(name):
    steps = SMALL_SETS[name].as_float()
    k = structural_constants(steps)
    z = 0.5 * float(k.rho)
    for family in FAMILIES:
        if family == "e1" and not steps.is_motzkin:
            continue
        assert abs(eval_gf(steps, k, family, z) - _truncated(steps, family, z)) < 1e-9, family


def test_excursions_at_fifth():
    s = motzkin(1, 1, 1)
    k = structural_constants(s)
    assert abs(eval_gf(s, k, "excursions", 0.2) - _truncated(s, "excursions", 0.2, 60)) < 1e-10


def test_walks_closed_form():
    s = motzkin(1, 1, 1)
    assert abs(eval_gf(s, structural_constants(s), "walks", 0.1) - 10 / 7) < 1e-15


def test_complex_point_matches_series():
    s = SMALL_SETS["five"].as_float()
    k = structural_constants(s)
    z = 0.45 * float(k.rho) * cmath.exp(0.7j)
    for family in ("bridges", "excursions", "meanders", "tails"):
        assert abs(eval_gf(s, k, family, z) - _truncated(s, family, z)) < 1e-9


def test_domain_errors():
    s = motzkin(1, 1, 1)
    k = structural_constants(s)
    with pytest.raises(DomainError):
        eval_gf(s, k, "bridges", 0.34)
    with pytest.raises(DomainError):
        eval_gf(s, k, "nonsense", 0.1)


@pytest.mark.parametrize("name", sorted(SMALL_SETS))
def test_two_meander_forms_agree(name):
    steps = SMALL_SETS[name].as_float()
    k = structural_constants(steps)
    rng = random.Random(11)
    rho = float(k.rho)
    for _ in range(100):
        z = rng.uniform(0.05, 0.9) * rho * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        u = rng.uniform(0.3, 1.5) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        small = eval_gf(steps, k, "meanders", z, u=u, form="small")
        large = eval_gf(steps, k, "meanders", z, u=u, form="large")
        assert abs(small - large) < 1e-9 * max(1.0, abs(small))


@pytest.mark.parametrize("name", ["m111", "m211", "m2h3", "five"])
def test_bivariate_specialises_at_u_one(name):
    steps = SMALL_SETS[name].as_float()
    k = structural_constants(steps)
    rng = random.Random(5)
    stats = {"returns": "walks", "height": "walks"}
    if steps.is_motzkin:
        stats.update(signchanges="walks", bridge_signchanges="bridges")
    for _ in range(100):
        z = rng.uniform(0.02, 0.95) * float(k.rho) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        for stat, family in stats.items():
            a = eval_bivariate(steps, k, stat, z, 1.0)
            b = eval_gf(steps, k, family, z)
            assert abs(a - b) < 1e-12 * max(1.0, abs(b)) * 100, stat


@pytest.mark.parametrize("w", [(1, 1, 1), (2, 1, 1), (1, "1/2", 3)])
def test_height_matches_motzkin_closed_form(w):
    steps = motzkin(*w).as_float()
    k = structural_constants(steps)
    rng = random.Random(3)
    for _ in range(100):
        z = rng.uniform(0.02, 0.9) * float(k.rho) * cmath.exp(1j * rng.uniform(-0.5, 0.5))
        u = rng.uniform(0.2, 0.9) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        a = eval_bivariate(steps, k, "height", z, u)
        b = height_motzkin_closed_form(steps, z, u)
        assert abs(a - b) < 1e-9 * max(1.0, abs(a))


def test_sign_changes_need_motzkin():
    s = StepSet({-2: 1, 1: 1})
    with pytest.raises(UnsupportedStatisticError):
        eval_bivariate(s, structural_constants(s), "signchanges", 0.1, 0.5)


def test_pole_of_returns_bgf():
    s = motzkin(1, 1, 1)
    k = structural_constants(s)
    b = eval_gf(s, k, "bridges", 0.1)
    with pytest.raises(PoleError):
        eval_bivariate(s, k, "returns", 0.1, b / (b - 1))


def test_length_two_bridges_have_no_sign_change():
    s = motzkin(1, 1, 1)
    k = structural_constants(s)
    grid = bivariate_coefficients(s, k, "bridge_signchanges", 4, 3)
    assert abs(grid[2, 0] - 3) < 1e-9
    assert np.all(np.abs(grid[2, 1:]) < 1e-9)
    bridges2 = [alts for _, _, alts in walks(s, 2) if alts[-1] == 0]
    assert len(bridges2) == 3


@pytest.mark.parametrize("name", ["m111", "m2h3", "five"])
def test_bivariate_coefficients_match_counts(name):
    steps = SMALL_SETS[name]
    k = structural_constants(steps.as_float())
    stats = ["returns", "height"] + (["signchanges", "bridge_signchanges"] if steps.is_motzkin else [])
    n_max = 8 if len(steps.jumps) <= 3 else 6
    for stat in stats:
        grid = bivariate_coefficients(steps.as_float(), k, stat, n_max, n_max * steps.d, points_z=128, points_u=64)
        for n in range(1, n_max + 1):
            d = distribution(steps, stat, n, exact=True)
            if stat == "bridge_signchanges":
                total = coeffs(steps, "bridges", n).coeffs[n]
            else:
                total = steps.total_weight() ** n
            for kk, p in enumerate(d.probs):
                count = float(p * total)
                assert abs(grid[n, kk] - count) <= 1e-6 * max(1.0, count), (stat, n, kk)


def test_oracle_joint_counts_sum_to_marginals():
    s = SMALL_SETS["m2h3"]
    for n in range(5):
        acc = brute_joint_counts(s, "returns", n)
        assert sum(acc.values()) == s.total_weight() ** n

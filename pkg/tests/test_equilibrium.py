import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from stakepool.distributions import CustomCDF, Power, Uniform
from stakepool.equilibrium import (Corner, GameParams, classify_lambda, indifference_gap,
                                   lambda_from_cstar, security_max_cstar,
                                   solve_threshold_equilibrium, welfare,
                                   welfare_derivative, welfare_optimal_cstar)
from stakepool.errors import DomainError, ValidationError

params_st = st.tuples(st.floats(0.1, 10.0), st.floats(0.0, 0.99), st.floats(0.1, 5.0)).map(
    lambda t: GameParams(H=t[0], M=t[0] * t[1], R=t[2]))


@pytest.mark.parametrize("kw", [
    dict(H=1.0, M=1.0), dict(H=1.0, M=-0.1), dict(H=0.0, M=0.0), dict(H=1.0, M=0.5, R=0.0),
    dict(H=1.0, M=0.5, lam=1.5), dict(H=float("nan"), M=0.5),
])
def test_params_validation(kw):
    with pytest.raises(ValidationError):
        GameParams(**kw)


def test_base_threshold(base_params, uniform):
    eq = solve_threshold_equilibrium(base_params, uniform)
    assert eq.corner is Corner.INTERIOR
    assert eq.cstar == pytest.approx((-0.5 + math.sqrt(4.25)) / 2, abs=1e-12)
    assert eq.security == pytest.approx(eq.P / (eq.P + 0.5))
    assert eq.D + eq.P == pytest.approx(1.0)
    # stake-per-pool identity (s + 1)(P + M) = D + P + M
    assert (eq.s + 1) * (eq.P + 0.5) == pytest.approx(1.5)


def test_power_threshold_solves_fixed_point():
    p = GameParams(1.0, 0.5, 1.0, 1.0)
    c = solve_threshold_equilibrium(p, Power(0.5)).cstar
    assert c == pytest.approx(1.0 / (math.sqrt(c) + 0.5), abs=1e-12)
    ref = optimize.brentq(lambda x: 1.0 / (math.sqrt(x) + 0.5) - x, 1e-9, 1.0, xtol=1e-15)
    assert c == pytest.approx(ref, abs=1e-12)


def test_corners(uniform):
    p = GameParams(1.0, 0.5, 1.0, 0.2)
    eq = solve_threshold_equilibrium(p, uniform)
    assert eq.corner is Corner.NO_INTERIOR and eq.cstar == 0.0 and eq.security == 0.0
    eq = solve_threshold_equilibrium(p.with_lambda(0.5 / 1.5), uniform)
    assert eq.corner is Corner.ALL_DELEGATE
    eq = solve_threshold_equilibrium(GameParams(1.0, 0.5, 5.0, 1.0), uniform)
    assert eq.corner is Corner.ALL_POOL and eq.cstar == 1.0


def test_zero_malicious_limit(uniform):
    eq = solve_threshold_equilibrium(GameParams(1.0, 0.0, 1.0, 1.0), uniform)
    assert eq.cstar == pytest.approx(1.0)
    assert eq.security == 1.0


def test_infinite_support_custom_distribution():
    dist = CustomCDF(lambda c: 1.0 - math.exp(-c), name="exp")
    p = GameParams(1.0, 0.5, 3.0, 1.0)
    c = solve_threshold_equilibrium(p, dist).cstar
    assert indifference_gap(c, p, dist) == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(0.0, 1.0))
def test_classification_and_single_crossing(p, u):
    lam = p.lambda_bound + u * (1.0 - p.lambda_bound)
    q = p.with_lambda(lam)
    corner = classify_lambda(q)
    if lam > p.lambda_bound + 1e-12:
        assert corner is Corner.INTERIOR
        grid = np.linspace(1e-9, 1.0, 400)
        signs = np.sign([indifference_gap(c, q, Uniform()) for c in grid])
        signs = signs[signs != 0]
        assert np.count_nonzero(np.diff(signs)) <= 1


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(0.01, 0.98))
def test_lambda_inverse_roundtrip(p, c):
    lam = lambda_from_cstar(c, p, Uniform())
    if 0.0 < lam <= 1.0 and lam > p.lambda_bound + 1e-9:
        eq = solve_threshold_equilibrium(p.with_lambda(lam), Uniform())
        assert eq.cstar == pytest.approx(c, abs=1e-9)


def test_lambda_inverse_domain(base_params, uniform):
    with pytest.raises(DomainError):
        lambda_from_cstar(1.0, base_params, uniform)


def test_security_increases_with_lambda(base_params, uniform):
    lams = np.linspace(0.34, 1.0, 30)
    sec = [solve_threshold_equilibrium(base_params.with_lambda(x), uniform).security for x in lams]
    assert all(b > a for a, b in zip(sec, sec[1:]))
    assert security_max_cstar(base_params, uniform).security == pytest.approx(sec[-1])


def test_welfare_values(base_params, uniform):
    assert welfare(0.0, base_params, uniform) == 0.0
    assert welfare(0.5, base_params, uniform) == pytest.approx(0.5 / 1.0 - 0.125)


def test_welfare_optimum_uniform(base_params, uniform):
    d = welfare_optimal_cstar(base_params, uniform)
    assert d.cstar == pytest.approx(0.5, abs=1e-12)
    assert d.lam == pytest.approx(5 / 6, abs=1e-12)
    assert abs(welfare_derivative(d.cstar, base_params, uniform)) < 1e-8
    assert not d.heuristic


def test_welfare_corner():
    d = welfare_optimal_cstar(GameParams(1.0, 0.9, 1.0, 1.0), Uniform(0.2))
    assert d.regime == "corner" and d.cstar == 0.2 and d.lam == 1.0


def test_welfare_nonconcave_is_flagged():
    dist = CustomCDF(lambda c: min(1.0, c * c), upper=1.0)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        d = welfare_optimal_cstar(GameParams(1.0, 0.5), dist)
    assert d.heuristic
    assert any(issubclass(x.category, RuntimeWarning) for x in w)
    xs = np.linspace(0.0, 1.0, 2001)
    best = max(welfare(x, GameParams(1.0, 0.5), dist) for x in xs)
    assert d.value >= best - 1e-9

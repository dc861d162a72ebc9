import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stakepool.distributions import CustomCDF, Power, Uniform
from stakepool.equilibrium import GameParams
from stakepool.errors import DomainError, ShapeDiagnosticError
from stakepool.reward_design import (SWEEP_COLUMNS, Shape, classify_shape, lambda_grid,
                                     malicious_reward_share, minimize_malicious_reward,
                                     sweep_lambda)


@pytest.mark.parametrize("M, ref", [(0.5, 0.390388), (0.4, 0.327922), (1 / 3, 0.282376)])
def test_share_at_one(M, ref):
    p = GameParams(1.0, M)
    mu = malicious_reward_share(1.0, p, Uniform())
    assert mu == pytest.approx(ref, abs=5e-7)
    assert mu == pytest.approx(2 * M / (M + math.sqrt(M * M + 4)), abs=1e-12)


def test_share_at_bound_is_malicious_stake_fraction():
    p = GameParams(1.0, 0.5)
    assert malicious_reward_share(p.lambda_bound, p, Uniform()) == pytest.approx(1 / 3)


def test_share_domain():
    with pytest.raises(DomainError):
        malicious_reward_share(0.2, GameParams(1.0, 0.5), Uniform())


@pytest.mark.parametrize("values, shape", [
    ([1, 2, 3], Shape.INCREASING), ([1, 3, 2], Shape.INCREASING_THEN_DECREASING),
    ([3, 2, 1], Shape.INCREASING_THEN_DECREASING), ([1, 3, 2, 4], Shape.OTHER),
    ([1, 1, 1], Shape.INCREASING),
])
def test_classify_shape(values, shape):
    assert classify_shape(values) is shape


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95))
def test_uniform_curve_single_peak(M):
    p = GameParams(1.0, M)
    curve = sweep_lambda(p, Uniform(), lambda_grid(p, 1000))
    assert curve.shape is not Shape.OTHER
    assert curve.mus[0] < curve.mus[-1]


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8, 1.0])
def test_power_endpoint_order(alpha):
    p = GameParams(1.0, 0.5)
    dist = Power(alpha)
    assert malicious_reward_share(p.lambda_bound, p, dist) < malicious_reward_share(1.0, p, dist)


def test_minimize_with_floor():
    d = minimize_malicious_reward(GameParams(1.0, 0.5), Uniform(), lambda_floor=0.5)
    assert d.lam == 0.5
    assert d.value == pytest.approx(0.378319, abs=1e-6)


def test_minimize_no_floor_picks_bound():
    p = GameParams(1.0, 0.5)
    d = minimize_malicious_reward(p, Uniform())
    assert d.lam == pytest.approx(p.lambda_bound)


def test_minimize_rejects_irregular_shape():
    # steep-then-flat CDF makes mu dip and rise again
    def F(c):
        return min(1.0, 0.9 * min(c / 0.05, 1.0) + 0.1 * max(0.0, c - 0.05) / 0.95)
    p = GameParams(1.0, 0.5)
    curve = sweep_lambda(p, CustomCDF(F, upper=1.0), lambda_grid(p, 400))
    assert curve.shape is Shape.OTHER
    with pytest.raises(ShapeDiagnosticError):
        minimize_malicious_reward(p, CustomCDF(F, upper=1.0), grid_points=400)


def test_csv_schema():
    p = GameParams(1.0, 0.5)
    text = sweep_lambda(p, Uniform(), np.linspace(0.5, 1.0, 6)).to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 7
    assert all(len(v.split(".")[1]) == 6 for v in rows[1])

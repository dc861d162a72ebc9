import math

import numpy as np
import pytest
from scipy import stats

from stakepool.discrete import (DiscreteConfig, best_response_iteration,
                                best_response_threshold, convergence_study,
                                empirical_threshold, mean_field_gap, replication_rng,
                                replication_thresholds, run_replication, simulate,
                                trend_nonincreasing)
from stakepool.distributions import Power, Uniform
from stakepool.equilibrium import GameParams, indifference_gap, solve_threshold_equilibrium
from stakepool.errors import ValidationError


@pytest.fixture
def cfg():
    return DiscreteConfig.from_continuum(GameParams(1.0, 0.5), Uniform(), 2000,
                                         replications=20, seed=7)


@pytest.mark.parametrize("kw", [dict(n=10, m=10), dict(n=10, m=-1), dict(n=10, m=2, replications=0),
                                dict(n=10, m=2, lam=1.5), dict(n=10, m=2, damping=0.0)])
def test_config_validation(kw):
    base = dict(R=1.0, lam=1.0, dist=Uniform())
    base.update(kw)
    with pytest.raises(ValidationError):
        DiscreteConfig(**base)


def test_from_continuum_scaling():
    c = DiscreteConfig.from_continuum(GameParams(2.0, 0.5, 3.0), Uniform(), 1000)
    assert c.m == 250 and c.R == pytest.approx(1500.0)


def test_mean_field_matches_continuum_gap():
    p = GameParams(1.0, 0.5, 1.0, 0.8)
    c = DiscreteConfig.from_continuum(p, Uniform(), 1000)
    for x in (0.1, 0.4, 0.7):
        assert mean_field_gap(c, x) == pytest.approx(indifference_gap(x, p, Uniform()), abs=1e-12)


def test_replication_invariants(cfg):
    th = best_response_threshold(cfg)
    for j in range(cfg.replications):
        s = run_replication(cfg, th, replication_rng(cfg.seed, j))
        d = s.delegation_counts
        assert d.sum() == cfg.n - s.k
        assert (1 + d).sum() == cfg.n + cfg.m
        total = s.owner_payout + s.delegator_payout + s.burned
        assert total == pytest.approx(cfg.R)
        assert s.owner_payout == pytest.approx(cfg.lam * cfg.R)


def test_empty_pool_share_is_burned():
    c = DiscreteConfig(n=3, m=2, R=1.0, lam=0.5, dist=Uniform(), replications=200, seed=1)
    burned = [run_replication(c, 0.9, replication_rng(1, j)).burned for j in range(200)]
    assert any(b == pytest.approx(0.5) for b in burned)
    assert all(b in (0.0, pytest.approx(0.5)) for b in burned)


def test_seed_determinism(cfg):
    a = simulate(cfg)
    b = simulate(cfg)
    assert a.replications == b.replications
    assert a.aggregate() == b.aggregate()
    other = simulate(DiscreteConfig.from_continuum(GameParams(1.0, 0.5), Uniform(), 2000,
                                                   replications=20, seed=8))
    assert other.replications != a.replications


def test_streams_depend_only_on_index(cfg):
    s3 = run_replication(cfg, 0.5, replication_rng(cfg.seed, 3))
    again = run_replication(cfg, 0.5, replication_rng(cfg.seed, 3))
    assert s3 == again


def test_k_is_binomial():
    c = DiscreteConfig(n=50, m=25, R=50.0, lam=1.0, dist=Uniform(), replications=1000, seed=3)
    th = 0.4
    ks = np.array([run_replication(c, th, replication_rng(c.seed, j)).k for j in range(1000)])
    binom = stats.binom(50, th)
    edges = [-0.5, 14.5, 17.5, 19.5, 21.5, 23.5, 26.5, 50.5]
    obs, _ = np.histogram(ks, bins=edges)
    exp = np.diff(binom.cdf(np.array(edges)))
    exp = exp / exp.sum() * ks.size
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_delegation_uniform_over_pools():
    c = DiscreteConfig(n=5000, m=20, R=1.0, lam=0.9, dist=Uniform(), replications=1, seed=4)
    s = run_replication(c, 0.01, replication_rng(4, 0))
    d = s.delegation_counts
    assert stats.chisquare(d).pvalue > 0.01


def test_best_response_converges():
    c = DiscreteConfig.from_continuum(GameParams(1.0, 0.5, 1.0, 0.8), Power(0.3), 1000)
    br = best_response_iteration(c)
    assert abs(mean_field_gap(c, br.threshold)) < 1e-7
    assert br.threshold == pytest.approx(
        solve_threshold_equilibrium(GameParams(1.0, 0.5, 1.0, 0.8), Power(0.3)).cstar, abs=1e-8)


def test_unsustainable_pooling():
    c = DiscreteConfig(n=20, m=10, R=20.0, lam=0.3, dist=Uniform(), replications=5)
    rep = simulate(c)
    assert not rep.sustainable and rep.threshold == 0.0
    assert all(s.k == 0 for s in rep.replications)


def test_single_agent():
    c = DiscreteConfig(n=1, m=0, R=1.0, lam=1.0, dist=Uniform(), replications=1)
    rep = simulate(c)
    assert rep.replications[0].k == 1
    assert rep.aggregate()["security"]["mean"] == 1.0


def test_report_json_shape(cfg):
    d = simulate(cfg).to_dict(per_replication=True)
    assert d["schema_version"] == 1
    assert len(d["replications"]) == cfg.replications
    assert set(d["aggregate"]["security"]) == {"mean", "se"}


def test_empirical_threshold_close_to_continuum():
    p = GameParams(1.0, 0.5)
    c = DiscreteConfig.from_continuum(p, Uniform(), 5000, replications=50, seed=2)
    th, se = empirical_threshold(c)
    assert th == pytest.approx(solve_threshold_equilibrium(p, Uniform()).cstar, abs=0.01)
    each = replication_thresholds(c)
    assert each.shape == (50,)
    assert np.all((each > 0) & (each < 1))


def test_convergence_study_trend():
    rows = convergence_study(GameParams(1.0, 0.5), Uniform(), [100, 1000, 10000],
                             replications=50, seed=0)
    devs = [r["deviation"] for r in rows]
    assert trend_nonincreasing(devs)
    assert devs[-1] < 0.02
    assert rows[-1]["mean_field_deviation"] < 1e-8


def test_trend_helper():
    assert trend_nonincreasing([3, 2, 1])
    assert not trend_nonincreasing([1, 2, 3])

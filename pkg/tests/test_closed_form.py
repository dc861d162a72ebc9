import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from stakepool.closed_form import (cbrt, cubic_roots, equilibrium_cubic,
                                   security_max_uniform, textbook_coefficients,
                                   welfare_optimal_uniform)
from stakepool.distributions import Uniform
from stakepool.equilibrium import GameParams, solve_threshold_equilibrium, welfare_optimal_cstar
from stakepool.errors import InfeasibleError, ValidationError


def test_cbrt_principal_branch():
    assert cbrt(8.0) == pytest.approx(2.0)
    assert cbrt(-8.0) == pytest.approx(1.0 + 1j * math.sqrt(3.0))
    assert cbrt(0.0) == 0


@settings(max_examples=200)
@given(st.lists(st.floats(-5.0, 5.0), min_size=3, max_size=3), st.floats(0.1, 5.0))
def test_cubic_roots_match_numpy(rs, a):
    coeffs = a * np.poly(rs)
    _, _, _, roots = cubic_roots(*coeffs)
    ref = np.sort_complex(np.roots(coeffs))
    got = np.sort_complex(np.array(roots))
    scale = 1.0 + max(abs(r) for r in rs)
    # multiple roots are ill-conditioned: error ~ cbrt(eps)
    assert np.allclose(got, ref, atol=1e-4 * scale)
    for r in roots:
        assert abs(np.polyval(coeffs, r)) <= 1e-6 * scale ** 3 * a


def test_cubic_triple_root():
    _, _, C, roots = cubic_roots(1.0, -3.0, 3.0, -1.0)
    assert C == 0
    assert all(r == pytest.approx(1.0) for r in roots)


def test_cubic_needs_leading_coefficient():
    with pytest.raises(ValidationError):
        cubic_roots(0.0, 1.0, 1.0, 1.0)


def test_security_max_uniform():
    c, clipped = security_max_uniform(1.0, 0.5, 1.0)
    assert c == pytest.approx(0.780776, abs=5e-7) and not clipped
    c, clipped = security_max_uniform(1.0, 0.0, 1.0)
    assert c == 1.0 and not clipped
    c, clipped = security_max_uniform(1.0, 0.5, 4.0)
    assert c == 1.0 and clipped


@pytest.mark.parametrize("M", [0.05, 0.2, 0.4, 0.5, 0.9])
def test_welfare_radical_matches_search(M):
    c = welfare_optimal_uniform(1.0, M)
    d = welfare_optimal_cstar(GameParams(1.0, M), Uniform())
    assert c == pytest.approx(d.cstar, abs=1e-9)


def test_welfare_radical_at_half():
    assert welfare_optimal_uniform(1.0, 0.5) == pytest.approx(0.5, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.0, 0.95), st.floats(0.1, 3.0), st.floats(0.0, 1.0))
def test_cubic_agrees_with_bisection(H, mfrac, R, u):
    M = H * mfrac
    bound = M / (H + M)
    lam = bound + 1e-3 + u * (1.0 - bound - 1e-3)
    eq = solve_threshold_equilibrium(GameParams(H, M, R, lam), Uniform())
    assume(0.0 < eq.cstar < 1.0 - 1e-6)
    sol = equilibrium_cubic(H, M, R, lam)
    assert sol.feasible_root == pytest.approx(eq.cstar, abs=1e-9)
    assert sol.residual(sol.feasible_root) <= 1e-10 * sol.coefficient_scale()


def test_cubic_reference_value():
    sol = equilibrium_cubic(1.0, 0.5, 1.0, 0.8)
    assert sol.feasible_root == pytest.approx(0.46115996, abs=1e-8)
    assert sol.delta0 == pytest.approx(sol.b ** 2 - 3 * sol.a * sol.d)


def test_cubic_infeasible_below_bound():
    with pytest.raises(InfeasibleError):
        equilibrium_cubic(1.0, 0.5, 1.0, 0.2)


def test_textbook_orientation_same_roots():
    a, b, d, e = textbook_coefficients(1.0, 0.4, 1.0, 0.7)
    sol = equilibrium_cubic(1.0, 0.4, 1.0, 0.7)
    x = sol.feasible_root
    assert abs(((a * x + b) * x + d) * x + e) < 1e-12

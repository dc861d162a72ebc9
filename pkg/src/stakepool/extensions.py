"""Variants of the base game.

* Costly delegation: delegating costs ``cd``; with an idle option, high-cost
  agents may prefer to stay out.
* Endogenous rewards: rewards are paid only when the honest pool share plus
  the protocol's fault tolerance ``theta`` reaches one.
* Return competition: pool owners post their own splits, possibly subject to
  a protocol floor.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import CostDistribution
from .equilibrium import (BOUNDARY_RTOL, Corner, DesignResult, EquilibriumResult,
                          GameParams, classify_lambda, equilibrium_summary,
                          security_max_cstar, solve_gap_root,
                          solve_threshold_equilibrium)
from .errors import DomainError, InfeasibleError, RegimeError, ValidationError


# -- costly delegation -------------------------------------------------------

@dataclass(frozen=True)
class CostlyDelegationParams:
    base: GameParams
    cd: float

    def __post_init__(self):
        if not (self.cd > 0.0 and math.isfinite(self.cd)):
            raise ValidationError(f"delegation cost must be positive, got {self.cd!r}")

    @property
    def lambda_bound(self) -> float:
        """Interior solutions of the pool-or-delegate game need lam above this."""
        H, M, R = self.base.H, self.base.M, self.base.R
        return (M * R - self.cd * M * H) / (H * R + M * R)


class CostlyRegime(str, enum.Enum):
    # pool or delegate; delegation still pays at least cd
    DELEGATION = "Delegation"
    # lam > M/(H+M), but delegators would rather be idle
    DELEGATION_UNPROFITABLE = "DelegationUnprofitable"
    # lam in [bound_d, M/(H+M)] and delegation unprofitable: pool below c', idle above
    POOL_OR_IDLE = "PoolOrIdle"
    NO_POOLS = "NoPools"


@dataclass(frozen=True)
class CostlyDelegationResult:
    cstar: float
    regime: CostlyRegime
    c_prime: float | None = None
    delegates: bool = True

    def to_dict(self) -> dict:
        return {"cstar": self.cstar, "regime": self.regime.value,
                "c_prime": self.c_prime, "delegates": self.delegates}


def _costly_root(cdp: CostlyDelegationParams, dist: CostDistribution) -> float:
    return solve_gap_root(cdp.base, dist, cd=cdp.cd)


def solve_costly_delegation(cdp: CostlyDelegationParams,
                            dist: CostDistribution) -> CostlyDelegationResult:
    """Threshold of the costly-delegation game and the regime it lands in.

    When delegating at the threshold still pays at least ``cd`` nobody idles
    and the pool-or-delegate root stands.  Otherwise, for lam up to
    M/(H+M), agents switch to pooling below c' (< cstar) and idling above.
    """
    p = cdp.base
    bound_d = cdp.lambda_bound
    if p.lam <= bound_d + BOUNDARY_RTOL * max(1.0, abs(bound_d)):
        return CostlyDelegationResult(0.0, CostlyRegime.NO_POOLS, delegates=False)
    cstar = _costly_root(cdp, dist)
    ok = delegation_participation_check(cstar, cdp, dist)
    if ok:
        return CostlyDelegationResult(cstar, CostlyRegime.DELEGATION)
    if classify_lambda(p) is not Corner.INTERIOR:
        # pool runners at cstar would rather idle; the idle option takes over
        c_prime = idle_pool_threshold(cdp, dist)
        return CostlyDelegationResult(cstar, CostlyRegime.POOL_OR_IDLE, c_prime, delegates=False)
    return CostlyDelegationResult(cstar, CostlyRegime.DELEGATION_UNPROFITABLE, delegates=False)


def idle_pool_threshold(cdp: CostlyDelegationParams, dist: CostDistribution) -> float:
    """c' solving lam R/(F(c')H + M) = c' in the pool-or-idle regime."""
    p = cdp.base
    lo_b = cdp.lambda_bound
    hi_b = p.lambda_bound
    tol = BOUNDARY_RTOL * max(1.0, hi_b)
    if not (lo_b - tol <= p.lam <= hi_b + tol):
        raise RegimeError(
            f"lambda={p.lam!r} outside the pool-or-idle regime [{lo_b!r}, {hi_b!r}]; "
            "use solve_costly_delegation")
    if p.lam == 0.0:
        return 0.0
    return solve_gap_root(p, dist, with_delegators=False)


def delegation_participation_check(cstar: float, cdp: CostlyDelegationParams,
                                   dist: CostDistribution) -> bool:
    """Does delegating at threshold cstar pay at least the delegation cost?"""
    p = cdp.base
    if p.lam >= 1.0:
        return cdp.cd <= 0.0
    F = dist.cdf(cstar)
    rest = (1.0 - F) * p.H
    if rest <= 0.0:
        return True
    return (1.0 - p.lam) * p.R / rest >= cdp.cd


def max_security_costly(cdp: CostlyDelegationParams, dist: CostDistribution,
                        grid_points: int = 2001) -> DesignResult:
    """Largest threshold reachable while delegation still covers its cost.

    The costly-delegation threshold increases with lam, so the optimum is the
    largest lam at which delegators still break even.  A grid over lam
    locates the feasible set and bisection sharpens its upper edge.
    """
    base = cdp.base
    lo = max(cdp.lambda_bound, 0.0)

    def threshold(lam):
        p = base.with_lambda(lam)
        if lam <= cdp.lambda_bound:
            return 0.0
        return solve_gap_root(p, dist, cd=cdp.cd)

    def feasible(lam):
        if lam <= cdp.lambda_bound:
            return False
        c = threshold(lam)
        if c <= 0.0:
            return False
        return delegation_participation_check(c, CostlyDelegationParams(base.with_lambda(lam), cdp.cd), dist)

    lams = np.linspace(lo, 1.0, grid_points)
    flags = [feasible(float(x)) for x in lams]
    if not any(flags):
        return DesignResult("security-costly", math.nan, 0.0, 0.0, "all-idle",
                            notes=("no lambda makes delegation worth its cost with pools running",))
    i = max(j for j, f in enumerate(flags) if f)
    best = float(lams[i])
    if i + 1 < lams.size:
        a, b = best, float(lams[i + 1])
        for _ in range(100):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if feasible(mid):
                a = mid
            else:
                b = mid
        best = a
    cstar = threshold(best)
    eq = equilibrium_summary(cstar, base, dist)
    bench = security_max_cstar(base, dist)
    notes = [f"benchmark c*={bench.cstar:.6g}"]
    if cstar > bench.cstar + 1e-9:
        notes.append("WARNING: exceeds benchmark threshold")
    return DesignResult("security-costly", best, cstar, eq.security, "interior", notes=tuple(notes))


# -- endogenous rewards ------------------------------------------------------

@dataclass(frozen=True)
class EndogenousParams:
    base: GameParams
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 0.5:
            raise ValidationError(f"theta must lie in [0, 1/2], got {self.theta!r}")


@dataclass(frozen=True)
class EndogenousResult:
    c_theta: float
    lambda_min: float
    equilibrium: EquilibriumResult
    security: float
    full_security: bool

    def to_dict(self) -> dict:
        return {"c_theta": self.c_theta, "lambda_min": self.lambda_min,
                "equilibrium": self.equilibrium.to_dict(), "security": self.security,
                "full_security": self.full_security, "rewards_paid": self.full_security}


def required_pool_mass(ep: EndogenousParams) -> float:
    """F level at which the honest pool share reaches 1 - theta."""
    H, M = ep.base.H, ep.base.M
    if M == 0.0:
        return 0.0
    if ep.theta == 0.0:
        return math.inf
    return (1.0 - ep.theta) * M / (ep.theta * H)


def endogenous_threshold_cost(ep: EndogenousParams, dist: CostDistribution) -> float:
    """Smallest cost c with F(c)H/(F(c)H + M) >= 1 - theta."""
    need = required_pool_mass(ep)
    if need >= 1.0:
        raise InfeasibleError(
            f"full security unachievable: needs F(c) >= {need!r}, i.e. "
            f"H/(H+M) = {ep.base.H / (ep.base.H + ep.base.M)!r} > 1 - theta strictly")
    if need <= 0.0:
        return 0.0
    if dist.kernel_spec() is not None:
        return float(dist.ppf(need))
    T = dist.support_upper
    hi = T if math.isfinite(T) else 1.0
    while dist.cdf(hi) < need:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if dist.cdf(mid) >= need:
            hi = mid
        else:
            lo = mid
    return hi


def endogenous_lambda_bound(ep: EndogenousParams, dist: CostDistribution) -> float:
    """Split above which the equilibrium threshold exceeds c_theta."""
    c = endogenous_threshold_cost(ep, dist)
    H, M, R = ep.base.H, ep.base.M, ep.base.R
    F = dist.cdf(c)
    return ((c / R) * (F * H + M) * (1.0 - F) * H + F * H + M) / (H + M)


def endogenous_security(security: float, theta: float) -> float:
    return min(1.0, security + theta)


def solve_endogenous(ep: EndogenousParams, dist: CostDistribution) -> EndogenousResult:
    """Equilibrium at ep.base.lam plus the full-security verdict."""
    c_theta = endogenous_threshold_cost(ep, dist)
    lam_min = endogenous_lambda_bound(ep, dist)
    eq = solve_threshold_equilibrium(ep.base, dist)
    sec = endogenous_security(eq.security, ep.theta)
    return EndogenousResult(c_theta, lam_min, eq, sec, sec >= 1.0)


# -- return competition ------------------------------------------------------

class CompetitionRegime(str, enum.Enum):
    DISRUPTED = "Disrupted"
    FIXED_EQUIVALENT = "FixedEquivalent"


@dataclass(frozen=True)
class CompetitionOutcome:
    regime: CompetitionRegime
    effective_lambda: float | None
    equilibrium: EquilibriumResult | None

    def to_dict(self) -> dict:
        return {"regime": self.regime.value, "effective_lambda": self.effective_lambda,
                "equilibrium": None if self.equilibrium is None else self.equilibrium.to_dict()}


def classify_return_competition(params: GameParams, dist: CostDistribution,
                                lambda_floor: float | None = None) -> CompetitionOutcome:
    """Outcome when pool owners choose their own split above an optional floor.

    Without a floor strictly above M/(H+M), malicious owners undercut and no
    honest agent runs a pool.  With such a floor everyone posts the floor and
    the outcome is the fixed-split equilibrium at lam = floor.
    """
    if lambda_floor is None:
        return CompetitionOutcome(CompetitionRegime.DISRUPTED, None, None)
    if not 0.0 <= lambda_floor <= 1.0:
        raise DomainError(f"floor must lie in [0, 1], got {lambda_floor!r}")
    p = params.with_lambda(lambda_floor)
    if classify_lambda(p) is not Corner.INTERIOR:
        return CompetitionOutcome(CompetitionRegime.DISRUPTED, lambda_floor, None)
    return CompetitionOutcome(CompetitionRegime.FIXED_EQUIVALENT, lambda_floor,
                              solve_threshold_equilibrium(p, dist))


__all__ = [
    "CostlyDelegationParams", "CostlyRegime", "CostlyDelegationResult",
    "solve_costly_delegation", "idle_pool_threshold", "delegation_participation_check",
    "max_security_costly", "EndogenousParams", "EndogenousResult",
    "endogenous_threshold_cost", "endogenous_lambda_bound", "endogenous_security",
    "solve_endogenous", "CompetitionRegime", "CompetitionOutcome",
    "classify_return_competition",
]

"""Finite-population Monte Carlo of the pool formation game.

``n`` honest agents draw i.i.d. costs, those below a threshold open pools,
``m`` malicious agents always open pools, and every remaining honest agent
delegates to a pool chosen uniformly at random.  One block reward ``r`` is
paid per round to a proposer drawn with probability proportional to pool
stake ``(1 + d_i)/(n + m)``.

Each replication owns a generator derived from ``(seed, index)`` through
``numpy.random.SeedSequence``, so results do not depend on execution order.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .distributions import CostDistribution
from .equilibrium import GameParams, solve_threshold_equilibrium
from .errors import NumericError, ValidationError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DiscreteConfig:
    n: int
    m: int
    R: float
    lam: float
    dist: CostDistribution
    replications: int = 100
    seed: int = 0
    damping: float = 0.5

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and isinstance(self.m, (int, np.integer))):
            raise ValidationError("n and m must be integers")
        if not self.n > self.m >= 0:
            raise ValidationError(f"need n > m >= 0, got n={self.n}, m={self.m}")
        if self.replications < 1:
            raise ValidationError("replications must be at least 1")
        if not self.R > 0.0:
            raise ValidationError("R must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError("lambda must lie in [0, 1]")
        if not 0.0 < self.damping <= 1.0:
            raise ValidationError("damping must lie in (0, 1]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit nonnegative integer")

    @classmethod
    def from_continuum(cls, params: GameParams, dist: CostDistribution, n: int,
                       m: int | None = None, replications: int = 100, seed: int = 0,
                       damping: float = 0.5) -> "DiscreteConfig":
        """Population of size n matching a continuum game.

        m defaults to round(n M/H) and the block reward is scaled to
        R n/H so that the mean-field indifference equation coincides with
        the continuum one.
        """
        if m is None:
            m = int(round(n * params.M / params.H))
        return cls(n=int(n), m=int(m), R=params.R * n / params.H, lam=params.lam, dist=dist,
                   replications=replications, seed=seed, damping=damping)

    @property
    def lambda_bound(self) -> float:
        return self.m / (self.n + self.m)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "R": self.R, "lambda": self.lam,
                "dist": self.dist.describe(), "replications": self.replications,
                "seed": self.seed, "damping": self.damping}


@dataclass
class ReplicationStats:
    k: int
    delegation_counts: np.ndarray
    owner_utilities: np.ndarray
    mean_owner_utility: float
    mean_delegator_utility: float
    indifference_gap: float
    security: float
    proposer: int
    owner_payout: float
    delegator_payout: float
    burned: float
    degenerate: bool = False

    def __eq__(self, other):
        if not isinstance(other, ReplicationStats):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "delegation_counts": self.delegation_counts.tolist(),
            "mean_owner_utility": self.mean_owner_utility,
            "mean_delegator_utility": self.mean_delegator_utility,
            "indifference_gap": self.indifference_gap,
            "security": self.security,
            "proposer": self.proposer,
            "owner_payout": self.owner_payout,
            "delegator_payout": self.delegator_payout,
            "burned": self.burned,
            "degenerate": self.degenerate,
        }


def replication_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def run_replication(config: DiscreteConfig, threshold: float,
                    rng: np.random.Generator) -> ReplicationStats:
    """One round: costs, pool openings, delegation, proposer and payouts."""
    T = config.dist.support_upper
    if not 0.0 <= threshold <= T:
        raise ValidationError(f"threshold {threshold!r} outside [0, {T!r}]")
    n, m, lam, r = config.n, config.m, config.lam, config.R
    total = n + m
    costs = np.asarray(config.dist.sample(rng, n), dtype=float)
    runs_pool = costs < threshold
    k = int(np.count_nonzero(runs_pool))
    pools = k + m
    nan = math.nan
    if pools == 0:
        return ReplicationStats(k=0, delegation_counts=np.zeros(0, dtype=np.int64),
                                owner_utilities=np.zeros(0), mean_owner_utility=nan,
                                mean_delegator_utility=nan, indifference_gap=nan,
                                security=0.0, proposer=-1, owner_payout=0.0,
                                delegator_payout=0.0, burned=r, degenerate=True)
    nd = n - k
    choice = rng.integers(0, pools, size=nd)
    d = np.bincount(choice, minlength=pools)
    weight = (1.0 + d) / total
    # honest pools first, in agent order; malicious pools follow
    owner_util = weight[:k] * lam * r - costs[runs_pool]
    if nd > 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            per_deleg = np.where(d > 0, weight * (1.0 - lam) * r / np.maximum(d, 1), 0.0)
        mean_deleg = float(np.sum(d * per_deleg) / nd)
        gap_deleg = mean_deleg
    else:
        mean_deleg = nan
        gap_deleg = (1.0 - lam) * r * 2.0 / total
    gap = lam * r / pools - threshold - gap_deleg
    proposer = int(rng.choice(pools, p=weight))
    owner_payout = lam * r
    if d[proposer] > 0:
        deleg_payout, burned = (1.0 - lam) * r, 0.0
    else:
        deleg_payout, burned = 0.0, (1.0 - lam) * r
    return ReplicationStats(
        k=k, delegation_counts=d, owner_utilities=owner_util,
        mean_owner_utility=float(owner_util.mean()) if k else nan,
        mean_delegator_utility=mean_deleg, indifference_gap=float(gap),
        security=k / pools, proposer=proposer, owner_payout=owner_payout,
        delegator_payout=deleg_payout, burned=burned)


def mean_field_gap(config: DiscreteConfig, c: float) -> float:
    """Indifference gap with k and d_i replaced by their means."""
    n, m, lam, r = config.n, config.m, config.lam, config.R
    F = config.dist.cdf(c)
    pools = F * n + m
    owner = math.inf if pools == 0.0 else lam * r / pools
    deleg = 0.0
    if lam < 1.0:
        rest = n - F * n
        deleg = math.inf if rest <= 0.0 else (1.0 - lam) * r / rest
    return owner - deleg - c


@dataclass
class BestResponse:
    threshold: float
    iterations: int
    trace: list[float] = field(default_factory=list)


def best_response_iteration(config: DiscreteConfig, tol: float = 1e-9,
                            max_iter: int = 10_000) -> BestResponse:
    """Damped best-response iteration on the mean-field threshold map.

    Each step moves ``damping`` of the way towards the best response.  The
    iterate is kept inside a bracket that every evaluated point shrinks, and
    falls back to the bracket midpoint whenever the damped step leaves it, so
    the iteration cannot oscillate on steep CDFs.
    """
    bound = config.lambda_bound
    if config.lam <= bound + 1e-12 * max(1.0, bound):
        return BestResponse(0.0, 0, [0.0])
    T = config.dist.support_upper
    g = lambda c: mean_field_gap(config, c)  # noqa: E731
    hi = T
    if not math.isfinite(hi):
        hi = 1.0
        while g(hi) > 0.0:
            hi *= 2.0
            if hi > 1e300:
                raise NumericError("cannot bracket the best-response threshold")
    elif g(hi) >= 0.0:
        return BestResponse(hi, 0, [hi])
    lo = 0.0
    c = 0.5 * (lo + hi)
    trace = [c]
    for it in range(1, max_iter + 1):
        gc = g(c)
        if gc == 0.0:
            return BestResponse(c, it, trace)
        if gc > 0.0:
            lo = c
        else:
            hi = c
        nxt = c + config.damping * gc
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        trace.append(nxt)
        if abs(nxt - c) < tol:
            return BestResponse(nxt, it, trace)
        c = nxt
    raise NumericError(f"best response did not converge in {max_iter} iterations; "
                       f"last iterates {trace[-10:]}")


def best_response_threshold(config: DiscreteConfig) -> float:
    return best_response_iteration(config).threshold


def _draw_crn(config: DiscreteConfig, replications: int):
    n = config.n
    costs = np.empty((replications, n))
    choice_u = np.empty((replications, n))
    for j in range(replications):
        rng = replication_rng(config.seed, j)
        costs[j] = np.sort(np.asarray(config.dist.sample(rng, n), dtype=float))
        choice_u[j] = rng.random(n)
    return costs, choice_u


def _support_for(config: DiscreteConfig, costs: np.ndarray) -> float:
    T = config.dist.support_upper
    if not math.isfinite(T):
        T = float(costs.max()) * (1.0 + 1e-12) + 1e-300
    return T


def _crn_gaps(config, costs, choice_u, thresholds):
    return kernels.mc_gaps(costs, choice_u, np.ascontiguousarray(thresholds, dtype=float),
                           config.m, config.lam, config.R)


def empirical_threshold(config: DiscreteConfig, replications: int | None = None,
                        tol: float = 1e-10) -> tuple[float, float]:
    """Threshold at which the replication-averaged indifference gap changes sign.

    Uses common random numbers: each replication's costs and pool-choice
    draws stay fixed while the threshold moves.  Returns (threshold,
    standard error of the averaged gap there).
    """
    reps = replications or config.replications
    costs, choice_u = _draw_crn(config, reps)
    T = _support_for(config, costs)

    def gap(c):
        g = _crn_gaps(config, costs, choice_u, np.full(reps, c))
        se = float(g.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        return float(g.mean()), se

    lo, hi = 0.0, T
    if gap(hi)[0] >= 0.0:
        return hi, gap(hi)[1]
    if gap(lo)[0] <= 0.0:
        return 0.0, gap(lo)[1]
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if gap(mid)[0] > 0.0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    return c, gap(c)[1]


def replication_thresholds(config: DiscreteConfig, replications: int | None = None,
                           tol: float = 1e-10) -> np.ndarray:
    """Each replication's own indifference threshold (vectorised bisection)."""
    reps = replications or config.replications
    costs, choice_u = _draw_crn(config, reps)
    T = _support_for(config, costs)
    lo = np.zeros(reps)
    hi = np.full(reps, T)
    at_top = _crn_gaps(config, costs, choice_u, hi) >= 0.0
    at_zero = _crn_gaps(config, costs, choice_u, lo) <= 0.0
    for _ in range(200):
        if float(np.max(hi - lo)) <= tol:
            break
        mid = 0.5 * (lo + hi)
        up = _crn_gaps(config, costs, choice_u, mid) > 0.0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    out = 0.5 * (lo + hi)
    out[at_top] = T
    out[at_zero & ~at_top] = 0.0
    return out


@dataclass
class SimulationReport:
    config: DiscreteConfig
    threshold: float
    sustainable: bool
    replications: list[ReplicationStats]
    elapsed: float

    def aggregate(self) -> dict:
        out = {}
        for key in ("k", "security", "indifference_gap", "mean_owner_utility",
                    "mean_delegator_utility"):
            vals = np.array([getattr(s, key) for s in self.replications if not s.degenerate],
                            dtype=float)
            vals = vals[~np.isnan(vals)]
            if vals.size == 0:
                out[key] = {"mean": None, "se": None}
                continue
            se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
            out[key] = {"mean": float(vals.mean()), "se": se}
        out["degenerate"] = sum(s.degenerate for s in self.replications)
        out["burned_total"] = float(sum(s.burned for s in self.replications))
        return out

    def to_dict(self, per_replication: bool = False) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "config": self.config.to_dict(),
             "threshold": self.threshold, "lambda_bound": self.config.lambda_bound,
             "sustainable": self.sustainable, "aggregate": self.aggregate(),
             "elapsed_seconds": self.elapsed}
        if per_replication:
            d["replications"] = [s.to_dict() for s in self.replications]
        return d


def simulate(config: DiscreteConfig, threshold: float | None = None) -> SimulationReport:
    """Run all replications at ``threshold`` (default: mean-field best response)."""
    sustainable = config.lam > config.lambda_bound
    if threshold is None:
        threshold = best_response_threshold(config) if sustainable else 0.0
    start = time.perf_counter()
    stats = [run_replication(config, threshold, replication_rng(config.seed, j))
             for j in range(config.replications)]
    return SimulationReport(config, threshold, sustainable, stats,
                            time.perf_counter() - start)


def smooth_median3(values) -> list[float]:
    v = list(values)
    if len(v) < 3:
        return v
    out = [v[0]]
    for i in range(1, len(v) - 1):
        out.append(float(np.median(v[i - 1:i + 2])))
    out.append(v[-1])
    return out


def trend_nonincreasing(values, atol: float = 0.0) -> bool:
    s = smooth_median3(values)
    return all(b <= a + atol for a, b in zip(s, s[1:]))


def convergence_study(params: GameParams, dist: CostDistribution, n_grid,
                      replications: int = 100, seed: int = 0) -> list[dict]:
    """Distance between finite-n thresholds and the continuum threshold.

    For each n the population is scaled as in ``DiscreteConfig.from_continuum``.
    ``deviation`` is the root-mean-square distance between each replication's
    own indifference threshold and the continuum threshold; ``pooled_cstar``
    is the root of the replication-averaged gap and ``mean_field_cstar`` the
    mean-field best response.

    With lam < 1 the delegator payoff keeps a Jensen gap that does not vanish
    with n (pool loads stay O(1) and random), so only lam = 1 converges to
    the continuum threshold.
    """
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValidationError("n_grid must be strictly ascending")
    cont = solve_threshold_equilibrium(params, dist).cstar
    rows = []
    for n in n_grid:
        cfg = DiscreteConfig.from_continuum(params, dist, n, replications=replications, seed=seed)
        mf = best_response_threshold(cfg)
        pooled, se = empirical_threshold(cfg)
        each = replication_thresholds(cfg)
        rows.append({"n": n, "m": cfg.m, "r": cfg.R, "continuum_cstar": cont,
                     "mean_field_cstar": mf, "mean_field_deviation": abs(mf - cont),
                     "pooled_cstar": pooled, "pooled_deviation": abs(pooled - cont),
                     "gap_se": se, "bias": float(each.mean() - cont),
                     "deviation": float(np.sqrt(np.mean((each - cont) ** 2)))})
    return rows

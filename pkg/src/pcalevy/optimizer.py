"""Trigger-level search for the first-PCA cost ``C_1(0, 0; b')``."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import DivergenceError, InfeasibleDomainError, ParameterError, PcaError
from .fluctuation import critical_bprime
from .pca_cost import Scenario, StatePair, cost_first, scale_functions

ORIGIN = StatePair(0.0, 0.0)
EDGE_GAP = 1e-4       # distance kept from a_target = 0 and from the divergence frontier
PRESCAN_POINTS = 200
BOUNDARY_TOL = 1e-5
STATICS_PARAMS = ("sigma1", "mu1", "a_target")


@dataclass(frozen=True)
class SweepRow:
    bprime: float
    cost: float | None  # None marks a divergent cost

    @property
    def diverged(self) -> bool:
        return self.cost is None


@dataclass(frozen=True)
class Optimum:
    bstar: float
    cost_at_bstar: float
    boundary_flag: bool
    domain: tuple


def cost_at_origin(scn: Scenario, bprime: float) -> float:
    """``C_1(0, 0; b')``, or ``inf`` where it diverges."""
    try:
        return cost_first(scn.with_bprime(bprime), ORIGIN)
    except DivergenceError:
        return math.inf


def sweep_bprime(scn: Scenario, lo: float, hi: float, steps: int) -> list:
    """``C_1(0, 0; b')`` on ``steps`` evenly spaced trigger levels in ``[lo, hi]``."""
    if not 0.0 <= lo < hi <= scn.b:
        raise ParameterError(f"sweep needs 0 <= lo < hi <= b, got lo={lo}, hi={hi}, b={scn.b}")
    if steps < 2:
        raise ParameterError(f"steps must be >= 2, got {steps}")
    rows = []
    for bp in np.linspace(lo, hi, steps):
        c = cost_at_origin(scn, float(bp))
        rows.append(SweepRow(float(bp), c if math.isfinite(c) else None))
    return rows


def frontier(scn: Scenario) -> float:
    """Critical trigger level of the normal regime (``inf`` if costs never diverge)."""
    sf0, _ = scale_functions(scn)
    crit = critical_bprime(sf0)
    return math.inf if crit is None else crit


def search_domain(scn: Scenario, domain: tuple | None = None) -> tuple:
    crit = frontier(scn)
    if domain is None:
        lo = max(scn.a_target, EDGE_GAP)
        hi = min(scn.b, crit) - EDGE_GAP
    else:
        lo, hi = domain
        if not lo < hi:
            raise ParameterError(f"domain must satisfy lo < hi, got {domain}")
        lo = max(lo, EDGE_GAP)
        hi = min(hi, scn.b, crit - EDGE_GAP)
    if crit <= lo or not lo < hi:
        raise InfeasibleDomainError(
            f"no finite-cost trigger level in [{lo:.6g}, {hi:.6g}] (costs diverge from b'={crit:.6g})"
        )
    return lo, hi


def optimize_bprime(scn: Scenario, domain: tuple | None = None) -> Optimum:
    """Minimize ``C_1(0, 0; b')`` over ``b'``.

    A uniform pre-scan locates the best cell; a bounded scalar search then
    refines within the two neighbouring cells.  The domain edges are compared
    explicitly so boundary minima come back exactly on the edge.
    """
    lo, hi = search_domain(scn, domain)
    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    costs = np.array([cost_at_origin(scn, float(g)) for g in grid])
    if not np.any(np.isfinite(costs)):
        raise InfeasibleDomainError(f"cost is infinite across [{lo}, {hi}]")
    i = int(np.argmin(costs))
    left, right = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        lambda x: cost_at_origin(scn, x), bounds=(left, right), method="bounded",
        options={"xatol": 1e-7},
    )
    candidates = [(float(res.fun), float(res.x)), (float(costs[i]), float(grid[i]))]
    if i == 0:
        candidates.append((float(costs[0]), lo))
    if i == grid.size - 1:
        candidates.append((float(costs[-1]), hi))
    cost, bstar = min(candidates)
    flag = bstar - lo < BOUNDARY_TOL or hi - bstar < BOUNDARY_TOL
    return Optimum(bstar=bstar, cost_at_bstar=cost, boundary_flag=flag, domain=(lo, hi))


def vary(base: Scenario, param: str, value: float) -> Scenario:
    if param == "sigma1":
        return replace(base, regime1=replace(base.regime1, sigma=value))
    if param == "mu1":
        return replace(base, regime1=replace(base.regime1, mu=value))
    if param == "a_target":
        return replace(base, a_target=value, bprime=value)
    raise ParameterError(f"param must be one of {STATICS_PARAMS}, got {param!r}")


@dataclass(frozen=True)
class StaticsRow:
    param: str
    value: float
    optimum: Optimum | None
    error: str | None = None


def comparative_statics(base: Scenario, param: str, values) -> list:
    """One optimum per value of ``param``, everything else held at ``base``.

    A failure on one row (invalid parameter, infeasible domain) is recorded
    on that row and does not stop the others.
    """
    if param not in STATICS_PARAMS:
        raise ParameterError(f"param must be one of {STATICS_PARAMS}, got {param!r}")
    rows = []
    for v in values:
        try:
            rows.append(StaticsRow(param, float(v), optimize_bprime(vary(base, param, float(v)))))
        except PcaError as exc:
            rows.append(StaticsRow(param, float(v), None, f"{type(exc).__name__}: {exc}"))
    return rows

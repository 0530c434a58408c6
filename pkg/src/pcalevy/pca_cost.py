"""Expected discounted cost of prompt corrective actions (PCA).

The first PCA cost ``C_1(x, s; b')`` is split by the starting drawdown
``d = s - x``:

* ``d >= b'``      PCA fires at once (``cost_c0``);
* ``d == 0``       start at the running maximum (``cost_c1_diag``);
* ``0 < d < b'``   first exit of the drawdown band (``cost_c2``).

On the diagonal every cost is of the form ``A e^s + B`` (``ExpAffine``), so the
n-th PCA cost is a two-coefficient linear recursion and the total over all
PCAs is a pair of geometric series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

from .errors import DivergenceError, DomainError, ParameterError
from .fluctuation import TriggerKernels, shallow_trigger, trigger_kernels
from .levy_core import RegimeParams, ScaleFunction, build_scale


@dataclass(frozen=True)
class Scenario:
    """A full problem instance.

    ``a_target`` is the post-infusion drawdown (leverage ``e^{a-b}``), ``b``
    the absorption depth, ``bprime`` the PCA trigger level, ``run_rate`` the
    running cost per unit of PCA time and ``penalty_coeff`` the insolvency
    penalty per unit of debt ``e^{S-b}``.
    """

    regime0: RegimeParams
    regime1: RegimeParams
    q: float
    b: float
    a_target: float
    bprime: float
    run_rate: float = 1.0
    penalty_coeff: float = 1.0

    def __post_init__(self):
        if not self.q > 0.0:
            raise ParameterError(f"q must be > 0, got {self.q}")
        if not self.b > 0.0:
            raise ParameterError(f"b must be > 0, got {self.b}")
        if not 0.0 <= self.a_target < self.b:
            raise ParameterError(f"a_target must satisfy 0 <= a < b, got a={self.a_target}, b={self.b}")
        if not 0.0 <= self.bprime <= self.b:
            raise ParameterError(f"bprime must satisfy 0 <= bprime <= b, got {self.bprime}")
        if self.run_rate < 0.0:
            raise ParameterError(f"run_rate must be >= 0, got {self.run_rate}")
        if self.penalty_coeff < 0.0:
            raise ParameterError(f"penalty_coeff must be >= 0, got {self.penalty_coeff}")

    def with_bprime(self, bprime: float) -> "Scenario":
        return replace(self, bprime=bprime)


@dataclass(frozen=True)
class StatePair:
    x: float
    s: float

    def __post_init__(self):
        if self.x > self.s:
            raise DomainError(f"log-asset {self.x} above running maximum {self.s}")

    @property
    def drawdown(self) -> float:
        return self.s - self.x


@dataclass(frozen=True)
class ExpAffine:
    """The function ``m -> coeff_exp * e^m + coeff_const``."""

    coeff_exp: float
    coeff_const: float

    def __call__(self, m: float) -> float:
        return self.coeff_exp * math.exp(m) + self.coeff_const

    def scaled(self, fa: float, fb: float) -> "ExpAffine":
        return ExpAffine(fa * self.coeff_exp, fb * self.coeff_const)

    def __add__(self, other: "ExpAffine") -> "ExpAffine":
        return ExpAffine(self.coeff_exp + other.coeff_exp, self.coeff_const + other.coeff_const)

    def __mul__(self, k: float) -> "ExpAffine":
        return ExpAffine(k * self.coeff_exp, k * self.coeff_const)

    __rmul__ = __mul__


@dataclass(frozen=True)
class CostBreakdown:
    initial: float
    running: float
    penalty: float

    @property
    def total(self) -> float:
        return self.initial + self.running + self.penalty


@dataclass(frozen=True)
class PcaPhase:
    """Outcome of the PCA phase started at drawdown ``a`` inside ``[0, b]``.

    ``success_prob``: ``E[e^{-q tau}; back at the maximum first]``.
    ``ruin_disc``: ``E[e^{-q tau}; insolvent first]``.
    ``running``: ``run_rate * E[int_0^tau e^{-q t} dt]``.
    """

    success_prob: float
    ruin_disc: float
    running: float


@lru_cache(maxsize=256)
def _scale(regime: RegimeParams, q: float) -> ScaleFunction:
    return build_scale(regime, q)


def scale_functions(scn: Scenario):
    """``(W_0, W_1)`` for the normal and PCA regimes; cached per parameter set."""
    return _scale(scn.regime0, scn.q), _scale(scn.regime1, scn.q)


def pca_phase(scn: Scenario) -> PcaPhase:
    _, sf1 = scale_functions(scn)
    b, a = scn.b, scn.a_target
    p = sf1.w(b - a) / sf1.w(b)
    zba, zb = sf1.z(b - a), sf1.z(b)
    ruin = zba - zb * p
    running = scn.run_rate / scn.q * ((1.0 - zba) - (1.0 - zb) * p)
    return PcaPhase(success_prob=p, ruin_disc=ruin, running=running)


def kernels(scn: Scenario) -> TriggerKernels:
    sf0, _ = scale_functions(scn)
    return trigger_kernels(sf0, scn.bprime, scn.b)


def cost_c0_breakdown(scn: Scenario, st: StatePair) -> CostBreakdown:
    """Cost when the PCA fires at time zero (``s - x >= b'``)."""
    if st.drawdown < scn.bprime:
        raise DomainError(f"drawdown {st.drawdown} below trigger {scn.bprime}: PCA does not fire at once")
    ph = pca_phase(scn)
    return CostBreakdown(
        initial=math.exp(st.s - scn.a_target) - math.exp(st.x),
        running=ph.running,
        penalty=scn.penalty_coeff * math.exp(st.s - scn.b) * ph.ruin_disc,
    )


def cost_c0(scn: Scenario, st: StatePair) -> CostBreakdown:
    return cost_c0_breakdown(scn, st)


def _exp_coeff_const(scn: Scenario, ph: PcaPhase) -> float:
    # e^m coefficient of C0(m - u, m) without the -e^{-u} part
    return math.exp(-scn.a_target) + scn.penalty_coeff * math.exp(-scn.b) * ph.ruin_disc


def diag_c0_coeffs(scn: Scenario, u: float) -> ExpAffine:
    """``(P(u), Q)`` with ``C0(m - u, m) = P(u) e^m + Q`` for all ``m``."""
    if not scn.bprime <= u < scn.b:
        raise DomainError(f"u={u} outside [{scn.bprime}, {scn.b})")
    ph = pca_phase(scn)
    return ExpAffine(_exp_coeff_const(scn, ph) - math.exp(-u), ph.running)


def _require_finite(tk: TriggerKernels) -> None:
    if not tk.decay > 1.0:
        raise DivergenceError(
            f"cost diverges at bprime={tk.bprime}: W0'/W0 = {tk.decay:.6g} <= 1"
        )


def cost_c1_diag(scn: Scenario) -> ExpAffine:
    """``(A_1, B_1)`` with ``C_1(s, s; b') = A_1 e^s + B_1``.

    The maximum at the trigger has discounted density ``intensity *
    e^{-(m - s) decay}``, so integrating ``P e^m + Q`` against it gives
    ``P e^s / (decay - 1) + Q / decay``.
    """
    if not scn.bprime > 0.0:
        raise DomainError("the diagonal branch needs bprime > 0")
    tk = kernels(scn)
    _require_finite(tk)
    ph = pca_phase(scn)
    ce = _exp_coeff_const(scn, ph)
    k = tk.decay
    creep_part = tk.creep_coeff * (ce - math.exp(-scn.bprime))
    jump_part = ce * tk.jump_mass - tk.jump_exp_moment
    return ExpAffine((creep_part + jump_part) / (k - 1.0), ph.running * tk.intensity / k)


def cost_c2(scn: Scenario, st: StatePair) -> float:
    """Cost from a drawdown strictly between 0 and ``b'``."""
    d = st.drawdown
    if not 0.0 < d < scn.bprime:
        raise DomainError(f"drawdown {d} outside (0, {scn.bprime})")
    sf0, _ = scale_functions(scn)
    sh = shallow_trigger(sf0, scn.bprime, d, scn.b)
    ph = pca_phase(scn)
    ce = _exp_coeff_const(scn, ph)
    es = math.exp(st.s)
    c0_creep = (ce - math.exp(-scn.bprime)) * es + ph.running
    jump = (ce * es + ph.running) * sh.jump_mass - es * sh.jump_exp_moment
    reach = sh.reach_max_prob * cost_c1_diag(scn)(st.s)
    return sh.creep_prob * c0_creep + jump + reach


def branch(scn: Scenario, st: StatePair) -> str:
    """Which block of the first-PCA cost applies: ``"c0"``, ``"c1"`` or ``"c2"``.

    A drawdown exactly at ``b'`` belongs to the immediate-trigger block.
    """
    d = st.drawdown
    if d >= scn.bprime:
        return "c0"
    if d == 0.0:
        return "c1"
    return "c2"


def cost_first(scn: Scenario, st: StatePair) -> float:
    """``C_1(x, s; b')``, dispatched on the starting drawdown."""
    which = branch(scn, st)
    if which == "c0":
        return cost_c0(scn, st).total
    if which == "c1":
        return cost_c1_diag(scn)(st.s)
    return cost_c2(scn, st)


def cost_breakdown(scn: Scenario, st: StatePair) -> CostBreakdown:
    """Initial / running / penalty split of ``C_1(x, s; b')`` on any branch.

    The cost is affine in ``run_rate`` and ``penalty_coeff`` with the
    initial infusion as intercept, so the split follows from three
    evaluations.
    """
    if branch(scn, st) == "c0":
        return cost_c0_breakdown(scn, st)
    bare = replace(scn, run_rate=0.0, penalty_coeff=0.0)
    initial = cost_first(bare, st)
    running = cost_first(replace(bare, run_rate=scn.run_rate), st) - initial
    penalty = cost_first(replace(bare, penalty_coeff=scn.penalty_coeff), st) - initial
    return CostBreakdown(initial=initial, running=running, penalty=penalty)


def recursion_factors(scn: Scenario) -> tuple:
    """Per-coordinate multipliers ``(r_A, r_B)`` of the diagonal recursion."""
    tk = kernels(scn)
    _require_finite(tk)
    k = tk.decay
    pk = pca_phase(scn).success_prob * tk.intensity
    return pk / (k - 1.0), pk / k


def recursion_step(scn: Scenario, cn: ExpAffine) -> ExpAffine:
    """``C_{n+1}(s, s)`` from ``C_n(m, m) = A_n e^m + B_n``.

    The next PCA starts from the maximum reached at the previous trigger,
    after a successful PCA phase; both integrals over that maximum are
    exponential.
    """
    ra, rb = recursion_factors(scn)
    return cn.scaled(ra, rb)


def diag_cost_n(scn: Scenario, n: int) -> ExpAffine:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    c = cost_c1_diag(scn)
    if n > 1:
        ra, rb = recursion_factors(scn)
        c = c.scaled(ra ** (n - 1), rb ** (n - 1))
    return c


def cost_n(scn: Scenario, st: StatePair, n: int) -> float:
    """Cost of the n-th PCA from ``(x, s)``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n == 1:
        return cost_first(scn, st)
    which = branch(scn, st)
    p = pca_phase(scn).success_prob
    if which == "c1":
        return diag_cost_n(scn, n)(st.s)
    prev = diag_cost_n(scn, n - 1)(st.s)
    if which == "c0":
        return p * prev
    sf0, _ = scale_functions(scn)
    sh = shallow_trigger(sf0, scn.bprime, st.drawdown, scn.b)
    # every trigger before a new maximum leaves the maximum at s, so the
    # n-th cost from there is p * C_{n-1}(s, s) whatever the trigger type
    return (sh.creep_prob + sh.jump_mass) * p * prev + sh.reach_max_prob * diag_cost_n(scn, n)(st.s)


def diag_total(scn: Scenario) -> ExpAffine:
    """``sum_n C_n(s, s)`` as an ExpAffine, via the two geometric series."""
    ra, rb = recursion_factors(scn)
    if ra >= 1.0 or rb >= 1.0:
        raise DivergenceError(f"multi-PCA series diverges: factors r_A={ra:.6g}, r_B={rb:.6g}")
    return cost_c1_diag(scn).scaled(1.0 / (1.0 - ra), 1.0 / (1.0 - rb))


def total_cost(scn: Scenario, st: StatePair, n_terms: int | None = None) -> float:
    """``C(x, s; b') = sum_{n >= 1} C_n(x, s; b')``.

    With ``n_terms`` the series is truncated and summed term by term;
    otherwise the closed form is used.
    """
    if n_terms is not None:
        return math.fsum(cost_n(scn, st, n) for n in range(1, n_terms + 1))
    if scn.bprime == 0.0:
        # every PCA starts at once from the maximum; C_n(s,s) = p^{n-1} C0(s,s)
        p = pca_phase(scn).success_prob
        if p >= 1.0:
            raise DivergenceError("zero trigger level with certain PCA success repeats forever")
        first = cost_first(scn, st)
        diag = cost_c0(scn, StatePair(st.s, st.s)).total / (1.0 - p)
        return first + p * diag if st.drawdown > 0.0 else diag
    which = branch(scn, st)
    tot = diag_total(scn)
    if which == "c1":
        return tot(st.s)
    p = pca_phase(scn).success_prob
    s_tot = tot(st.s)
    if which == "c0":
        return cost_c0(scn, st).total + p * s_tot
    sf0, _ = scale_functions(scn)
    sh = shallow_trigger(sf0, scn.bprime, st.drawdown, scn.b)
    later = (sh.creep_prob + sh.jump_mass) * p * s_tot + sh.reach_max_prob * (s_tot - cost_c1_diag(scn)(st.s))
    return cost_c2(scn, st) + later

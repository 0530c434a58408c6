"""Monte Carlo simulation of the switching PCA model.

The simulator is an independent check on the analytic costs: it only uses
elementary facts about Brownian motion and Poisson clocks, never a scale
function.

Path construction
-----------------
* Jump times come from exact exponential clocks and jump sizes from
  ``Exp(jump_rate)``; the diffusion between grid points is sampled exactly.
* Every step ends at or before the next jump time.  In the normal regime the
  trigger barrier ``S - b'`` moves with the maximum, so the step is
  ``max_step`` away from it and shrinks to ``dt`` near it (at most
  ``(gap / (barrier_sigmas * sigma))**2``).  The PCA-phase race has fixed
  barriers and no step cap: the step follows the same rule with the nearer
  barrier (and a drift bound), so far from both barriers it can be long.
* Inside a step the running maximum is updated with an exact draw of the
  Brownian-bridge maximum, and continuous barrier crossings between grid
  points are detected with the bridge crossing probability.
* Optionally the normal-regime phase runs under an exponentially tilted
  measure ``e^{theta (X_t - X_0) - psi(theta) t}``; costs are reweighted by
  the inverse likelihood ratio.  With ``theta = 0`` this is plain Monte
  Carlo.  The infusion cost carries a factor ``e^{S_T}`` whose discounted
  second moment is infinite near the optimal trigger level for the reference
  parameters, so cost estimates there need a tilt of order 1 for their
  standard errors to mean anything.

Randomness is drawn from independent substreams, one per block of
``block_size`` paths, keyed by ``(seed, block index)``; results do not depend
on how blocks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ParameterError
from .levy_core import RegimeParams, laplace_exponent
from .pca_cost import Scenario, StatePair

NONE, CREEP, JUMP, OVERSHOOT, IMMEDIATE = 0, 1, 2, 3, 4
TRIGGER_NAMES = {NONE: "none", CREEP: "creep", JUMP: "jump", OVERSHOOT: "overshoot", IMMEDIATE: "immediate"}


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    dt: float = 1e-4
    seed: int = 0
    horizon: float = 200.0
    max_pca_rounds: int = 1
    max_step: float = 0.05
    tilt: float = 0.0
    barrier_sigmas: float = 6.0
    block_size: int = 16384

    def __post_init__(self):
        if self.n_paths < 1:
            raise ParameterError("n_paths must be >= 1")
        if not self.dt > 0.0 or not self.max_step >= self.dt:
            raise ParameterError("need 0 < dt <= max_step")
        if not self.horizon > 0.0:
            raise ParameterError("horizon must be > 0")
        if self.max_pca_rounds < 1:
            raise ParameterError("max_pca_rounds must be >= 1")
        if self.block_size < 1:
            raise ParameterError("block_size must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "McEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        mean = float(np.sum(values) / n)
        sd = float(np.std(values, ddof=1)) if n > 1 else math.inf
        return cls(mean=mean, stderr=sd / math.sqrt(n), n=n)

    def zscore(self, value: float) -> float:
        return (self.mean - value) / self.stderr


@dataclass(frozen=True)
class PathOutcome:
    discounted_initial: float
    discounted_running: float
    discounted_penalty: float
    rounds: int
    trigger_type: str
    trigger_time: float
    max_gain: float
    horizon_hit: bool

    @property
    def total(self) -> float:
        return self.discounted_initial + self.discounted_running + self.discounted_penalty


@dataclass
class PathBatch:
    """Per-path arrays from a simulation run, in path-index order."""

    initial: np.ndarray
    running: np.ndarray
    penalty: np.ndarray
    rounds: np.ndarray
    trigger_type: np.ndarray
    trigger_time: np.ndarray
    max_gain: np.ndarray
    trigger_weight: np.ndarray
    horizon_hit: np.ndarray
    config: SimConfig = field(repr=False, default=None)

    @property
    def total(self) -> np.ndarray:
        return self.initial + self.running + self.penalty

    def estimate(self, name: str = "total") -> McEstimate:
        return McEstimate.from_samples(getattr(self, name))

    def outcome(self, i: int) -> PathOutcome:
        return PathOutcome(
            discounted_initial=float(self.initial[i]),
            discounted_running=float(self.running[i]),
            discounted_penalty=float(self.penalty[i]),
            rounds=int(self.rounds[i]),
            trigger_type=TRIGGER_NAMES[int(self.trigger_type[i])],
            trigger_time=float(self.trigger_time[i]),
            max_gain=float(self.max_gain[i]),
            horizon_hit=bool(self.horizon_hit[i]),
        )


@numba.njit(cache=True)
def _bridge_cross(gen, x0, x1, level, var):
    # P(Brownian bridge from x0 to x1 touches level), both ends on the same side
    return gen.random() < math.exp(-2.0 * (x0 - level) * (x1 - level) / var)


@numba.njit(cache=True)
def _fixed_barrier_step(gap_up, gap_down, mu, sig, ksig, dt):
    # A crossing found inside a step is timed at the step's end, so steps
    # shrink to dt near a barrier.  Away from both barriers, reaching one
    # within the step is a ksig-sigma event for diffusion and drift alike.
    near = min(gap_up, gap_down)
    h = (near / (ksig * sig)) ** 2
    if mu != 0.0:
        h = min(h, near / (ksig * abs(mu)))
    return max(h, dt)


@numba.njit(cache=True)
def _simulate(
    gen, n, x0, s0,
    mu0, sig0, ja0, jr0, psi_tilt, tilt,
    mu1, sig1, ja1, jr1,
    q, b, a, bp, run_rate, pen,
    dt, hmax, ksig, horizon, max_rounds, phase1,
    initial, running, penalty, rounds, ttype, ttime, mgain, tweight, hflag,
):
    var0 = sig0 * sig0
    var1 = sig1 * sig1
    for i in range(n):
        t = 0.0
        x = x0
        s = s0
        loglr = 0.0
        c_init = 0.0
        c_run = 0.0
        c_pen = 0.0
        nround = 0
        first = True
        ttype[i] = NONE
        ttime[i] = math.nan
        mgain[i] = math.nan
        tweight[i] = 0.0
        hflag[i] = False
        while True:
            # ---- normal regime: run until the drawdown reaches bp
            t_start = t
            x_start = x
            kind = NONE
            xl = x
            if s - x >= bp:
                kind = IMMEDIATE
            else:
                tj = t + gen.exponential(1.0 / ja0)
                while t < horizon:
                    gap = bp - (s - x)
                    h = (gap / (ksig * sig0)) ** 2
                    if h < dt:
                        h = dt
                    h = min(h, hmax, tj - t, horizon - t)
                    x1 = x + mu0 * h + sig0 * math.sqrt(h) * gen.standard_normal()
                    level = s - bp
                    if x1 <= level or _bridge_cross(gen, x, x1, level, var0 * h):
                        t += h
                        kind = CREEP
                        xl = level
                        break
                    mx = 0.5 * (x + x1 + math.sqrt((x1 - x) ** 2 - 2.0 * var0 * h * math.log(gen.random())))
                    if mx > s:
                        s = mx
                    x = x1
                    t += h
                    if s - x >= bp:
                        kind = CREEP
                        xl = s - bp
                        break
                    if t >= tj:
                        x -= gen.exponential(1.0 / jr0)
                        tj = t + gen.exponential(1.0 / ja0)
                        if s - x >= b:
                            kind = OVERSHOOT
                            xl = x
                            break
                        if s - x >= bp:
                            kind = JUMP
                            xl = x
                            break
            if kind == NONE:
                hflag[i] = True
                break
            if tilt != 0.0:
                loglr += tilt * (xl - x_start) - psi_tilt * (t - t_start)
            w = math.exp(-loglr)
            disc = math.exp(-q * t)
            if first:
                first = False
                ttype[i] = kind
                ttime[i] = t
                mgain[i] = s - s0
                tweight[i] = w * disc
            if kind == OVERSHOOT or not phase1:
                break
            # ---- PCA: infuse to s - a, race up to s against down to s - b
            nround += 1
            c_init += w * disc * (math.exp(s - a) - math.exp(xl))
            t_pca = t
            x = s - a
            up = s
            lo = s - b
            result = 0
            if x >= up:
                result = 1
            else:
                tj = t + gen.exponential(1.0 / ja1)
                while t < horizon:
                    h = min(_fixed_barrier_step(up - x, x - lo, mu1, sig1, ksig, dt), tj - t, horizon - t)
                    x1 = x + mu1 * h + sig1 * math.sqrt(h) * gen.standard_normal()
                    if x1 >= up or _bridge_cross(gen, x, x1, up, var1 * h):
                        t += h
                        result = 1
                        break
                    if x1 <= lo or _bridge_cross(gen, x, x1, lo, var1 * h):
                        t += h
                        result = 2
                        break
                    x = x1
                    t += h
                    if t >= tj:
                        x -= gen.exponential(1.0 / jr1)
                        tj = t + gen.exponential(1.0 / ja1)
                        if x <= lo:
                            result = 2
                            break
            c_run += w * run_rate * (math.exp(-q * t_pca) - math.exp(-q * t)) / q
            if result == 0:
                hflag[i] = True
                break
            if result == 2:
                c_pen += w * pen * math.exp(s - b) * math.exp(-q * t)
                break
            x = s
            if nround >= max_rounds:
                break
        initial[i] = c_init
        running[i] = c_run
        penalty[i] = c_pen
        rounds[i] = nround


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _regime_args(scn: Scenario, tilt: float):
    r0 = scn.regime0.tilted(tilt) if tilt != 0.0 else scn.regime0
    psi_tilt = laplace_exponent(scn.regime0, tilt) if tilt != 0.0 else 0.0
    r1 = scn.regime1
    return (
        r0.mu, r0.sigma, r0.jump_intensity, r0.jump_rate, psi_tilt, tilt,
        r1.mu, r1.sigma, r1.jump_intensity, r1.jump_rate,
    )


def _run(scn: Scenario, cfg: SimConfig, start: StatePair, phase1: bool, gen=None, n=None) -> PathBatch:
    n = cfg.n_paths if n is None else n
    out = PathBatch(
        initial=np.empty(n),
        running=np.empty(n),
        penalty=np.empty(n),
        rounds=np.empty(n, dtype=np.int64),
        trigger_type=np.empty(n, dtype=np.int64),
        trigger_time=np.empty(n),
        max_gain=np.empty(n),
        trigger_weight=np.empty(n),
        horizon_hit=np.empty(n, dtype=np.bool_),
        config=cfg,
    )
    fixed = (
        float(start.x), float(start.s),
        *_regime_args(scn, cfg.tilt),
        scn.q, scn.b, scn.a_target, scn.bprime, scn.run_rate, scn.penalty_coeff,
        cfg.dt, cfg.max_step, cfg.barrier_sigmas, cfg.horizon, cfg.max_pca_rounds, phase1,
    )
    arrays = (out.initial, out.running, out.penalty, out.rounds, out.trigger_type,
              out.trigger_time, out.max_gain, out.trigger_weight, out.horizon_hit)
    if gen is not None:
        _simulate(gen, n, *fixed, *arrays)
        return out
    for block, lo in enumerate(range(0, n, cfg.block_size)):
        hi = min(n, lo + cfg.block_size)
        views = tuple(arr[lo:hi] for arr in arrays)
        _simulate(block_generator(cfg.seed, block), hi - lo, *fixed, *views)
    return out


def simulate_paths(scn: Scenario, cfg: SimConfig, start: StatePair = StatePair(0.0, 0.0)) -> PathBatch:
    """Simulate ``cfg.n_paths`` independent paths through up to ``max_pca_rounds`` PCAs."""
    return _run(scn, cfg, start, phase1=True)


def simulate_path(scn: Scenario, cfg: SimConfig, rng: np.random.Generator,
                  start: StatePair = StatePair(0.0, 0.0)) -> PathOutcome:
    """One path drawn from ``rng``."""
    return _run(scn, cfg, start, phase1=True, gen=rng, n=1).outcome(0)


def estimate_cost(scn: Scenario, cfg: SimConfig, start: StatePair = StatePair(0.0, 0.0)) -> McEstimate:
    """Discounted cost over the first ``max_pca_rounds`` PCAs."""
    return simulate_paths(scn, cfg, start).estimate("total")


@dataclass(frozen=True)
class TriggerLawEstimate:
    """Discounted trigger masses by type and the law of the maximum gain."""

    creep: McEstimate
    jump: McEstimate
    overshoot: McEstimate
    edges: np.ndarray
    density: np.ndarray
    decay_rate: float
    decay_mle: float

    @property
    def total(self) -> float:
        return self.creep.mean + self.jump.mean


def fit_decay(gain: np.ndarray, weight: np.ndarray, bins: int = 40, upper: float | None = None):
    """Exponential rate of a weighted sample on ``[0, inf)``.

    Returns ``(edges, density, slope_rate, mle_rate)``: the rate from a
    weighted least-squares line through the log-histogram, and the weighted
    maximum-likelihood rate ``sum w / sum w m``.
    """
    mask = weight > 0.0
    gain, weight = gain[mask], weight[mask]
    mle = float(np.sum(weight) / np.sum(weight * gain))
    if upper is None:
        upper = 4.0 / mle
    edges = np.linspace(0.0, upper, bins + 1)
    mass, _ = np.histogram(gain, bins=edges, weights=weight)
    counts, _ = np.histogram(gain, bins=edges)
    width = np.diff(edges)
    density = mass / (width * gain.size)
    ok = counts >= 30
    centers = 0.5 * (edges[1:] + edges[:-1])
    slope, _ = np.polyfit(centers[ok], np.log(density[ok]), 1, w=np.sqrt(counts[ok]))
    return edges, density, float(-slope), mle


def estimate_trigger_law(scn: Scenario, cfg: SimConfig, start: StatePair = StatePair(0.0, 0.0),
                         bins: int = 40) -> TriggerLawEstimate:
    """Discounted creep / jump / overshoot masses and the maximum-gain law at the trigger."""
    batch = _run(scn, cfg, start, phase1=False)
    w = batch.trigger_weight
    kinds = batch.trigger_type
    creep = McEstimate.from_samples(np.where(kinds == CREEP, w, 0.0))
    jump = McEstimate.from_samples(np.where(kinds == JUMP, w, 0.0))
    over = McEstimate.from_samples(np.where(kinds == OVERSHOOT, w, 0.0))
    sel = (kinds == CREEP) | (kinds == JUMP)
    gain = np.where(sel, batch.max_gain, 0.0)
    edges, density, rate, mle = fit_decay(gain[sel], w[sel], bins=bins)
    density = density * sel.sum() / sel.size
    return TriggerLawEstimate(creep=creep, jump=jump, overshoot=over, edges=edges,
                              density=density, decay_rate=rate, decay_mle=mle)


@numba.njit(cache=True)
def _exit_kernel(gen, n, x0, c, mu, sig, ja, jr, q, dt, ksig, horizon, up_out, down_out, hflag):
    var = sig * sig
    bounded = c < math.inf
    for i in range(n):
        t = 0.0
        x = x0
        up_out[i] = 0.0
        down_out[i] = 0.0
        hflag[i] = False
        if bounded and x >= c:
            up_out[i] = 1.0
            continue
        if x <= 0.0:
            down_out[i] = 1.0
            continue
        tj = gen.exponential(1.0 / ja)
        done = False
        while t < horizon:
            h = min(_fixed_barrier_step(c - x, x, mu, sig, ksig, dt), tj - t, horizon - t)
            x1 = x + mu * h + sig * math.sqrt(h) * gen.standard_normal()
            if bounded and (x1 >= c or _bridge_cross(gen, x, x1, c, var * h)):
                t += h
                up_out[i] = math.exp(-q * t)
                done = True
                break
            if x1 <= 0.0 or _bridge_cross(gen, x, x1, 0.0, var * h):
                t += h
                down_out[i] = math.exp(-q * t)
                done = True
                break
            x = x1
            t += h
            if t >= tj:
                x -= gen.exponential(1.0 / jr)
                tj = t + gen.exponential(1.0 / ja)
                if x <= 0.0:
                    down_out[i] = math.exp(-q * t)
                    done = True
                    break
        if not done:
            hflag[i] = True


@dataclass(frozen=True)
class ExitEstimate:
    up: McEstimate
    down: McEstimate
    horizon_hits: int


def estimate_exit(regime: RegimeParams, q: float, x: float, c: float, cfg: SimConfig) -> ExitEstimate:
    """Discounted two-sided exit of ``[0, c]`` from ``x`` (``c = inf`` for one-sided ruin).

    ``up`` estimates ``E^x[e^{-q tau_c^+}; tau_c^+ < tau_0^-]`` and ``down``
    estimates ``E^x[e^{-q tau_0^-}; tau_0^- < tau_c^+]``.
    """
    n = cfg.n_paths
    up = np.empty(n)
    down = np.empty(n)
    hflag = np.empty(n, dtype=np.bool_)
    for block, lo in enumerate(range(0, n, cfg.block_size)):
        hi = min(n, lo + cfg.block_size)
        _exit_kernel(block_generator(cfg.seed, block), hi - lo, float(x), float(c),
                     regime.mu, regime.sigma, regime.jump_intensity, regime.jump_rate, q,
                     cfg.dt, cfg.barrier_sigmas, cfg.horizon,
                     up[lo:hi], down[lo:hi], hflag[lo:hi])
    return ExitEstimate(up=McEstimate.from_samples(up), down=McEstimate.from_samples(down),
                        horizon_hits=int(hflag.sum()))

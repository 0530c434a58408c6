"""Exit identities for the PCA-phase process and drawdown-trigger kernels for
the normal-phase process.

Drawdown is measured as ``S - X``.  The trigger time ``T_{b'}`` is the first
time the drawdown reaches ``b'``.  Under ``P^{s,s}`` the discounted law of the
trigger splits into

* a creeping part, ``creep_coeff * exp(-(m - s) decay) dm`` over the running
  maximum ``m`` at the trigger, and
* a jump part, ``Pi(dh) dy dm (W'(y) - decay W(y)) exp(-(m - s) decay)`` where
  ``y`` is the pre-jump drawdown and ``h < 0`` the jump.

Jumps that take the drawdown straight past the absorption depth ``b`` are not
part of the trigger law used for costing; they are reported separately.

Every ``y``-integral that appears reduces to ``int_0^U W^{(k)}(y) e^{rho y} dy``
because the jump density is exponential, so all of them are closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError
from .levy_core import ScaleFunction


def exit_up(sf: ScaleFunction, x: float, c: float) -> float:
    """``E^x[e^{-q tau_c^+}; tau_c^+ < tau_0^-] = W(x) / W(c)``."""
    _check_interval(x, c)
    if x == c:
        return 1.0
    return sf.w(x) / sf.w(c)


def exit_down(sf: ScaleFunction, x: float, c: float) -> float:
    """``E^x[e^{-q tau_0^-}; tau_0^- < tau_c^+] = Z(x) - Z(c) W(x) / W(c)``."""
    _check_interval(x, c)
    if x == c:
        return 0.0
    return sf.z(x) - sf.z(c) * sf.w(x) / sf.w(c)


def _check_interval(x: float, c: float) -> None:
    if not c > 0.0:
        raise DomainError(f"upper level must be > 0, got {c}")
    if not 0.0 <= x <= c:
        raise DomainError(f"start {x} outside [0, {c}]")


def ruin_laplace(sf: ScaleFunction, x: float) -> float:
    """``E^x[e^{-q tau_0^-}] = Z(x) - (q / Phi(q)) W(x)`` for ``x > 0``.

    The ``e^{Phi(q) x}`` parts of ``Z`` and ``W`` cancel, and so do the
    constants (partial fractions of ``1/(psi - q)`` at 0 give
    ``sum_i w_i / r_i = 1/q``).  What remains is
    ``q sum_{i>=1} w_i e^{r_i x} (1/r_i - 1/Phi)``, a sum of decaying terms
    that stays accurate for large ``x``.
    """
    if not x > 0.0:
        raise DomainError(f"ruin_laplace needs x > 0, got {x}")
    q, phi = sf.q, sf.phi_q
    rest, w = sf._r[1:], sf._w[1:]
    return float(q * np.sum(w * np.exp(rest * x) * (1.0 / rest - 1.0 / phi)))


def w_exp_integral(sf: ScaleFunction, upper: float, rate: float, order: int = 0) -> float:
    """``int_0^upper W^{(order)}(y) e^{rate y} dy`` in closed form."""
    if upper <= 0.0:
        return 0.0
    c = sf._r + rate
    cu = c * upper
    # (e^{c u} - 1) / c, with the c -> 0 limit u
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(cu) < 1e-12, upper, np.expm1(cu) / c)
    return float(np.sum(sf._w * sf._r**order * ratio))


def jump_window(sf0: ScaleFunction, bprime: float, b: float) -> tuple:
    """Factors ``(m0, m1)`` of the analytic jump integral over ``h in (y-b, y-b')``.

    ``int Pi(dh) = a e^{rho y} m0`` and ``int Pi(dh) e^{h - y} = a rho/(rho+1) e^{rho y} m1``.
    """
    rho = sf0.regime.jump_rate
    m0 = math.exp(-rho * bprime) - (math.exp(-rho * b) if math.isfinite(b) else 0.0)
    m1 = math.exp(-(rho + 1.0) * bprime) - (math.exp(-(rho + 1.0) * b) if math.isfinite(b) else 0.0)
    return m0, m1


@dataclass(frozen=True)
class TriggerKernels:
    """Discounted trigger law of the drawdown time from the running maximum.

    ``jump_mass`` is ``iint_E Pi(dh) dy (W'(y) - decay W(y))`` and
    ``jump_exp_moment`` the same integral weighted by ``e^{h - y}`` (needed
    for the pre-infusion asset value ``e^{m - y + h}``).  ``overshoot_mass``
    is the jump mass for jumps that carry the drawdown past ``b``.
    """

    creep_coeff: float
    decay: float
    bprime: float
    b: float
    jump_mass: float
    jump_exp_moment: float
    overshoot_mass: float

    @property
    def intensity(self) -> float:
        """Creep plus (non-overshooting) jump intensity per unit of maximum."""
        return self.creep_coeff + self.jump_mass

    @property
    def creep_mass(self) -> float:
        """``E^{s,s}[e^{-q T}; trigger by creeping]``."""
        return self.creep_coeff / self.decay

    @property
    def total_mass(self) -> float:
        """``E^{s,s}[e^{-q T}]`` restricted to triggers that do not overshoot ``b``."""
        return self.intensity / self.decay

    def max_gain_density(self, m):
        """Discounted density of ``S_T - s`` (all non-overshooting triggers)."""
        m = np.asarray(m, dtype=float)
        return np.where(m >= 0.0, self.intensity * np.exp(-self.decay * m), 0.0)


def trigger_kernels(sf0: ScaleFunction, bprime: float, b: float = math.inf) -> TriggerKernels:
    if not bprime > 0.0:
        raise DomainError(f"trigger level must be > 0, got {bprime}")
    if not b >= bprime:
        raise DomainError(f"absorption depth {b} below trigger level {bprime}")
    sigma2 = sf0.regime.sigma**2
    a, rho = sf0.regime.jump_intensity, sf0.regime.jump_rate
    w0, w1, w2 = (sf0.w(bprime, k) for k in (0, 1, 2))
    decay = w1 / w0
    creep = 0.5 * sigma2 * (w1 * w1 / w0 - w2)

    # int_0^{b'} (W'(y) - decay W(y)) e^{rho y} dy
    g_int = w_exp_integral(sf0, bprime, rho, 1) - decay * w_exp_integral(sf0, bprime, rho, 0)
    m0, m1 = jump_window(sf0, bprime, b)
    jump_mass = a * m0 * g_int
    jump_exp = a * rho / (rho + 1.0) * m1 * g_int
    over = a * (math.exp(-rho * b) if math.isfinite(b) else 0.0) * g_int
    return TriggerKernels(
        creep_coeff=creep,
        decay=decay,
        bprime=bprime,
        b=b,
        jump_mass=jump_mass,
        jump_exp_moment=jump_exp,
        overshoot_mass=over,
    )


@dataclass(frozen=True)
class ShallowTrigger:
    """Discounted outcomes from drawdown ``d in (0, b')`` with the maximum held at ``s``.

    ``creep_prob``: creeping to drawdown ``b'`` before a new maximum.
    ``jump_mass`` / ``jump_exp_moment``: jump triggers before a new maximum
    (the latter weighted by ``e^{h - y}``).
    ``reach_max_prob``: returning to the maximum before the trigger.
    """

    drawdown: float
    creep_prob: float
    jump_mass: float
    jump_exp_moment: float
    reach_max_prob: float


def shallow_trigger(sf0: ScaleFunction, bprime: float, drawdown: float, b: float = math.inf) -> ShallowTrigger:
    """Trigger kernels for a start strictly inside ``(0, b')`` of drawdown.

    Uses the two-sided exit of ``[s - b', s]``: with ``z = b' - d`` the
    distance to the trigger level, the creeping probability is
    ``sigma^2/2 (W'(z) - W'(b')/W(b') W(z))``, the jump kernel is
    ``W(z)/W(b') W(y) - W(y - d)``, and the return to the maximum has
    probability ``W(z)/W(b')``.
    """
    if not 0.0 < drawdown < bprime:
        raise DomainError(f"drawdown {drawdown} outside (0, {bprime})")
    sigma2 = sf0.regime.sigma**2
    a, rho = sf0.regime.jump_intensity, sf0.regime.jump_rate
    z = bprime - drawdown
    wz, w1z = sf0.w(z), sf0.w(z, 1)
    wb, w1b = sf0.w(bprime), sf0.w(bprime, 1)
    ratio = wz / wb
    creep = 0.5 * sigma2 * (w1z - w1b / wb * wz)
    # int_0^{b'} W(y) e^{rho y} dy and int_d^{b'} W(y - d) e^{rho y} dy
    g_int = ratio * w_exp_integral(sf0, bprime, rho) - math.exp(rho * drawdown) * w_exp_integral(sf0, z, rho)
    m0, m1 = jump_window(sf0, bprime, b)
    return ShallowTrigger(
        drawdown=drawdown,
        creep_prob=creep,
        jump_mass=a * m0 * g_int,
        jump_exp_moment=a * rho / (rho + 1.0) * m1 * g_int,
        reach_max_prob=ratio,
    )


def log_derivative(sf: ScaleFunction, x):
    return sf.w(x, 1) / sf.w(x)


def critical_bprime(sf0: ScaleFunction, level: float = 1.0):
    """Trigger level where ``W'/W`` falls to ``level`` (1 by default).

    Costs are finite strictly below it.  Returns ``None`` when the
    log-derivative stays above ``level`` everywhere, i.e. ``Phi(q) >= level``.
    """
    if sf0.phi_q >= level:
        return None
    f = lambda x: log_derivative(sf0, x) - level
    lo, hi = 1e-9, 1.0
    while f(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e4:
            raise ArithmeticError("failed to bracket the critical trigger level")
    return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

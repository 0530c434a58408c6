"""Laplace exponent and q-scale functions of a Brownian motion with drift
minus a compound Poisson stream of exponentially distributed jumps.

The process is ``X_t = mu t + sigma B_t - sum_{j <= N_t} eps_j`` with ``N`` a
Poisson process of intensity ``jump_intensity`` and ``eps_j ~ Exp(jump_rate)``.
Its Laplace exponent is

    psi(lam) = sigma^2 lam^2 / 2 + mu lam - a lam / (rho + lam),

and ``psi(lam) = q`` has three real roots, so the q-scale function is a sum of
three exponentials weighted by ``1 / psi'(root)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, PoleError, RootError, DomainError

# Relative separation below which two roots are treated as coincident.
ROOT_DISTINCT_TOL = 1e-9
# Roots with an imaginary part above this (relative) size mean the cubic has
# left the three-real-root family.
ROOT_IMAG_TOL = 1e-7


@dataclass(frozen=True)
class RegimeParams:
    """One regime's drift, volatility and exponential jump specification.

    The implied Levy measure is ``a rho e^{rho h} dh`` on ``h < 0``.
    """

    mu: float
    sigma: float
    jump_intensity: float
    jump_rate: float

    def __post_init__(self):
        for name in ("mu", "sigma", "jump_intensity", "jump_rate"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.sigma <= 0.0:
            raise ParameterError(
                f"sigma must be > 0 (creeping terms need a Gaussian part), got {self.sigma}"
            )
        if self.jump_intensity <= 0.0:
            raise ParameterError(f"jump_intensity must be > 0, got {self.jump_intensity}")
        if self.jump_rate <= 0.0:
            raise ParameterError(f"jump_rate must be > 0, got {self.jump_rate}")
        if self.mu < 0.0:
            raise ParameterError(f"mu must be >= 0, got {self.mu}")

    def levy_density(self, h):
        """Density of the Levy measure at ``h`` (zero for ``h >= 0``)."""
        h = np.asarray(h, dtype=float)
        a, rho = self.jump_intensity, self.jump_rate
        out = np.where(h < 0.0, a * rho * np.exp(np.minimum(rho * h, 0.0)), 0.0)
        return float(out) if out.ndim == 0 else out

    def tilted(self, theta: float) -> "RegimeParams":
        """Parameters of the process under the Esscher measure ``e^{theta X_t - psi(theta) t}``."""
        if theta <= -self.jump_rate:
            raise ParameterError("tilt must exceed -jump_rate")
        rho = self.jump_rate
        return RegimeParams(
            mu=self.mu + theta * self.sigma**2,
            sigma=self.sigma,
            jump_intensity=self.jump_intensity * rho / (rho + theta),
            jump_rate=rho + theta,
        )


@dataclass(frozen=True)
class RootSet:
    """The three real solutions of ``psi(lam) = q`` in descending order."""

    phi_q: float
    root_mid: float
    root_low: float
    q: float

    def as_array(self) -> np.ndarray:
        return np.array([self.phi_q, self.root_mid, self.root_low])


def _check_pole(regime: RegimeParams, lam: float) -> None:
    if lam == -regime.jump_rate:
        raise PoleError(f"Laplace exponent has a pole at lam = -rho = {lam}")


def laplace_exponent(regime: RegimeParams, lam: float) -> float:
    """``psi(lam) = log E[e^{lam X_1}]``.

    Negative arguments are accepted (they are needed to verify the negative
    roots) as long as ``lam != -jump_rate``.
    """
    _check_pole(regime, lam)
    s2 = regime.sigma**2
    return 0.5 * s2 * lam * lam + regime.mu * lam - regime.jump_intensity * lam / (regime.jump_rate + lam)


def laplace_exponent_deriv(regime: RegimeParams, lam: float) -> float:
    _check_pole(regime, lam)
    rho = regime.jump_rate
    return regime.sigma**2 * lam + regime.mu - regime.jump_intensity * rho / (rho + lam) ** 2


def characteristic_cubic(regime: RegimeParams, q: float) -> np.ndarray:
    """Coefficients (highest degree first) of ``(rho + lam)(psi(lam) - q)``."""
    s2 = regime.sigma**2
    mu, a, rho = regime.mu, regime.jump_intensity, regime.jump_rate
    return np.array([0.5 * s2, mu + 0.5 * s2 * rho, mu * rho - a - q, -q * rho])


def _polish(regime: RegimeParams, q: float, lam: float) -> float:
    # Newton on psi - q; a couple of steps are enough from the companion roots.
    for _ in range(4):
        f = laplace_exponent(regime, lam) - q
        df = laplace_exponent_deriv(regime, lam)
        if df == 0.0 or not math.isfinite(df):
            break
        step = f / df
        lam -= step
        if abs(step) <= 4e-16 * max(1.0, abs(lam)):
            break
    return lam


def solve_psi_roots(regime: RegimeParams, q: float) -> RootSet:
    """Solve ``psi(lam) = q`` for its three real roots.

    Raises
    ------
    RootError
        If the cubic has complex roots or two roots coincide.
    """
    if not q > 0.0:
        raise ParameterError(f"discount rate q must be > 0, got {q}")
    raw = np.roots(characteristic_cubic(regime, q))
    scale = np.maximum(1.0, np.abs(raw))
    if np.any(np.abs(raw.imag) > ROOT_IMAG_TOL * scale):
        raise RootError(f"psi(lam) = {q} lacks three real roots: {raw}")
    roots = sorted((_polish(regime, q, float(r)) for r in raw.real), reverse=True)
    for hi, lo in zip(roots, roots[1:]):
        if hi - lo <= ROOT_DISTINCT_TOL * (1.0 + abs(hi)):
            raise RootError(f"repeated root near {hi}; the three-exponential form degenerates")
    if roots[0] <= 0.0:
        raise RootError(f"largest root must be positive, got {roots[0]}")
    return RootSet(phi_q=roots[0], root_mid=roots[1], root_low=roots[2], q=q)


@dataclass(frozen=True)
class ScaleFunction:
    """Closed-form q-scale function ``W(x) = sum_i w_i e^{r_i x}`` and its companions."""

    roots: RootSet
    weights: tuple
    regime: RegimeParams
    _r: np.ndarray = field(init=False, repr=False, compare=False)
    _w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_r", self.roots.as_array())
        object.__setattr__(self, "_w", np.asarray(self.weights, dtype=float))

    @property
    def q(self) -> float:
        return self.roots.q

    @property
    def phi_q(self) -> float:
        return self.roots.phi_q

    def w(self, x, order: int = 0):
        """``order``-th derivative of W at ``x`` (scalar or array); zero for ``x < 0``."""
        if order not in (0, 1, 2):
            raise DomainError(f"order must be 0, 1 or 2, got {order}")
        x = np.asarray(x, dtype=float)
        coef = self._w * self._r**order
        val = np.exp(np.multiply.outer(np.maximum(x, 0.0), self._r)) @ coef
        val = np.where(x < 0.0, 0.0, val)
        return float(val) if val.ndim == 0 else val

    def z(self, x):
        """``Z(x) = 1 + q int_0^x W``, integrated term by term."""
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        terms = np.expm1(np.multiply.outer(xp, self._r)) @ (self._w / self._r)
        val = np.where(x <= 0.0, 1.0, 1.0 + self.q * terms)
        return float(val) if val.ndim == 0 else val

    def w_scaled(self, x):
        """``e^{-Phi(q) x} W(x)``, bounded by ``1/psi'(Phi(q))``."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0):
            raise DomainError("scaled scale function is evaluated on x >= 0")
        val = np.exp(np.multiply.outer(x, self._r - self.phi_q)) @ self._w
        return float(val) if val.ndim == 0 else val


def build_scale(regime: RegimeParams, q: float) -> ScaleFunction:
    roots = solve_psi_roots(regime, q)
    weights = tuple(1.0 / laplace_exponent_deriv(regime, r) for r in roots.as_array())
    if not all(math.isfinite(w) for w in weights):
        raise RootError(f"non-finite scale-function weight: {weights}")
    return ScaleFunction(roots=roots, weights=weights, regime=regime)


def scale_w(sf: ScaleFunction, x, order: int = 0):
    """Evaluate ``W``, ``W'`` or ``W''``.

    For ``x < 0`` every order returns 0; the derivative convention there is not
    used by any caller.
    """
    return sf.w(x, order)


def scale_z(sf: ScaleFunction, x):
    return sf.z(x)


def scale_w_scaled(sf: ScaleFunction, x):
    return sf.w_scaled(x)

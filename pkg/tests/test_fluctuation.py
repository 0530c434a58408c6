import math

import numpy as np
import pytest
from scipy import integrate

from pcalevy import build_scale, critical_bprime, exit_down, exit_up, ruin_laplace, trigger_kernels
from pcalevy.errors import DomainError
from pcalevy.fluctuation import log_derivative, shallow_trigger, w_exp_integral
from pcalevy.levy_core import RegimeParams


@pytest.fixture(scope="module")
def sf0(regime0):
    return build_scale(regime0, 0.1)


@pytest.fixture(scope="module")
def sf1(regime1):
    return build_scale(regime1, 0.1)


class TestExit:
    def test_endpoints(self, sf1):
        assert exit_up(sf1, 1.0, 1.0) == 1.0
        assert exit_down(sf1, 1.0, 1.0) == 0.0
        assert exit_up(sf1, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)
        # from 0 the Gaussian part exits downwards at once
        assert exit_down(sf1, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_discounted_probabilities_below_one(self, sf1):
        for x in np.linspace(0.05, 0.95, 10):
            up, down = exit_up(sf1, x, 1.0), exit_down(sf1, x, 1.0)
            assert 0 < up < 1 and 0 < down < 1 and up + down < 1

    def test_up_monotone(self, sf1):
        vals = [exit_up(sf1, x, 1.0) for x in np.linspace(0, 1, 21)]
        assert np.all(np.diff(vals) > 0)

    @pytest.mark.parametrize("x,c", [(-0.1, 1.0), (1.2, 1.0), (0.5, 0.0)])
    def test_domain(self, sf1, x, c):
        with pytest.raises(DomainError):
            exit_up(sf1, x, c)
        with pytest.raises(DomainError):
            exit_down(sf1, x, c)

    @pytest.mark.parametrize("x", [0.1, 0.5, 2.0])
    def test_down_tends_to_ruin(self, sf1, x):
        assert exit_down(sf1, x, 40.0) == pytest.approx(ruin_laplace(sf1, x), abs=1e-6)

    def test_ruin_formula_direct(self, sf1):
        # at moderate x the direct Z - q W / Phi form is still accurate
        x = 0.8
        direct = sf1.z(x) - sf1.q / sf1.phi_q * sf1.w(x)
        assert ruin_laplace(sf1, x) == pytest.approx(direct, rel=1e-10)

    def test_ruin_decreasing_and_domain(self, sf1):
        vals = [ruin_laplace(sf1, x) for x in (0.1, 1.0, 10.0, 100.0)]
        assert all(0 < v < 1 for v in vals) and np.all(np.diff(vals) < 0)
        with pytest.raises(DomainError):
            ruin_laplace(sf1, 0.0)


@pytest.mark.parametrize("order", [0, 1, 2])
@pytest.mark.parametrize("rate", [0.0, 10.0, -3.0])
def test_w_exp_integral(sf0, order, rate):
    u = 0.6
    want, _ = integrate.quad(lambda y: sf0.w(y, order) * math.exp(rate * y), 0, u, epsabs=1e-13, epsrel=1e-12)
    assert w_exp_integral(sf0, u, rate, order) == pytest.approx(want, rel=1e-10)
    assert w_exp_integral(sf0, 0.0, rate, order) == 0.0


class TestTriggerKernels:
    @pytest.mark.parametrize("bp", [0.1, 0.3, 0.5401, 0.66])
    def test_total_mass_identity(self, sf0, bp):
        # E^{s,s}[e^{-q T}] = Z(b') - q W(b')^2 / W'(b'), overshooting jumps included
        tk = trigger_kernels(sf0, bp, b=1.0)
        mass = tk.creep_mass + (tk.jump_mass + tk.overshoot_mass) / tk.decay
        want = sf0.z(bp) - sf0.q * sf0.w(bp) ** 2 / sf0.w(bp, 1)
        assert mass == pytest.approx(want, rel=1e-11)

    def test_jump_kernels_by_quadrature(self, sf0, regime0):
        bp, b = 0.5, 1.0
        tk = trigger_kernels(sf0, bp, b)
        k = tk.decay
        g = lambda y: sf0.w(y, 1) - k * sf0.w(y)
        dens = regime0.levy_density
        mass, _ = integrate.dblquad(lambda h, y: dens(h) * g(y), 0, bp, lambda y: y - b, lambda y: y - bp)
        moment, _ = integrate.dblquad(lambda h, y: dens(h) * g(y) * math.exp(h - y), 0, bp,
                                      lambda y: y - b, lambda y: y - bp)
        over, _ = integrate.dblquad(lambda h, y: dens(h) * g(y), 0, bp, lambda y: -np.inf, lambda y: y - b)
        assert tk.jump_mass == pytest.approx(mass, rel=1e-8)
        assert tk.jump_exp_moment == pytest.approx(moment, rel=1e-8)
        assert tk.overshoot_mass == pytest.approx(over, rel=1e-7)

    def test_unbounded_absorption(self, sf0):
        tk = trigger_kernels(sf0, 0.4)
        assert tk.overshoot_mass == 0.0
        capped = trigger_kernels(sf0, 0.4, b=1.0)
        assert tk.jump_mass == pytest.approx(capped.jump_mass + capped.overshoot_mass, rel=1e-12)

    def test_creep_coefficient_form(self, sf0, regime0):
        bp = 0.5
        tk = trigger_kernels(sf0, bp)
        w0, w1, w2 = (sf0.w(bp, k) for k in range(3))
        assert tk.creep_coeff == pytest.approx(0.5 * regime0.sigma**2 * (w1 * w1 / w0 - w2), rel=1e-14)
        assert tk.decay == pytest.approx(log_derivative(sf0, bp), rel=1e-14)

    def test_max_gain_density_integrates_to_mass(self, sf0):
        tk = trigger_kernels(sf0, 0.5, 1.0)
        val, _ = integrate.quad(tk.max_gain_density, 0, np.inf)
        assert val == pytest.approx(tk.total_mass, rel=1e-9)
        assert tk.max_gain_density(-0.1) == 0.0

    @pytest.mark.parametrize("bp,b", [(0.0, 1.0), (0.5, 0.4)])
    def test_domain(self, sf0, bp, b):
        with pytest.raises(DomainError):
            trigger_kernels(sf0, bp, b)


class TestShallowTrigger:
    @pytest.mark.parametrize("d", [0.05, 0.25, 0.45])
    def test_exit_decomposition(self, sf0, d):
        # without absorption: creep + jump = two-sided downward exit of [0, b'] from b' - d
        bp = 0.5
        sh = shallow_trigger(sf0, bp, d)
        assert sh.creep_prob + sh.jump_mass == pytest.approx(exit_down(sf0, bp - d, bp), rel=1e-11)
        assert sh.reach_max_prob == pytest.approx(exit_up(sf0, bp - d, bp), rel=1e-14)

    def test_limits(self, sf0):
        bp = 0.5
        near_top = shallow_trigger(sf0, bp, 1e-7, 1.0)
        assert near_top.reach_max_prob == pytest.approx(1.0, abs=1e-5)
        near_trigger = shallow_trigger(sf0, bp, bp - 1e-9, 1.0)
        assert near_trigger.creep_prob == pytest.approx(1.0, abs=1e-6)
        assert near_trigger.jump_mass == pytest.approx(0.0, abs=1e-6)

    @pytest.mark.parametrize("d", [0.0, 0.5, 0.7])
    def test_domain(self, sf0, d):
        with pytest.raises(DomainError):
            shallow_trigger(sf0, 0.5, d)


class TestCritical:
    def test_root(self, sf0):
        crit = critical_bprime(sf0)
        assert log_derivative(sf0, crit) == pytest.approx(1.0, abs=1e-12)
        assert log_derivative(sf0, crit - 0.01) > 1.0 > log_derivative(sf0, crit + 0.01)

    def test_other_level(self, sf0):
        crit = critical_bprime(sf0, 2.0)
        assert log_derivative(sf0, crit) == pytest.approx(2.0, abs=1e-11)

    def test_never_diverges_when_phi_large(self):
        sf = build_scale(RegimeParams(mu=0.0, sigma=0.2, jump_intensity=1.0, jump_rate=10.0), 1.0)
        assert sf.phi_q >= 1.0
        assert critical_bprime(sf) is None

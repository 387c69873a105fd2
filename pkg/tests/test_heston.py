import math

import numpy as np
import pytest
from scipy import integrate

from ggrnd.bs import BSParams, bs_call
from ggrnd.errors import DomainError
from ggrnd.heston import (
    HestonParams,
    heston_call,
    heston_charfn,
    heston_delta,
    heston_density,
    heston_moments,
    heston_pj,
    heston_probabilities,
    heston_standardized_density,
    moment_explosion_time,
)
from ggrnd.rnd import MarketContext

from oracles import heston_charfn_literal

CTX = MarketContext(100.0, 0.02, 0.01, 0.5)
P = HestonParams(kappa=2.0, theta=0.04, eta=0.5, rho=-0.7, v0=0.05)


class TestCharFn:
    def test_unit_at_zero(self, spy_ctx, spy_heston):
        for j in (1, 2):
            assert heston_charfn(j, 0.0, spy_ctx, spy_heston) == pytest.approx(1.0, abs=1e-14)

    def test_conjugate_symmetry(self):
        w = np.linspace(0.1, 80, 50)
        for j in (1, 2):
            assert np.allclose(heston_charfn(j, -w, CTX, P), np.conj(heston_charfn(j, w, CTX, P)), atol=1e-14)

    def test_share_measure_relation(self):
        w = np.linspace(0.05, 40, 30)
        lhs = heston_charfn(1, w, CTX, P)
        rhs = heston_charfn(2, w - 1j, CTX, P) / CTX.forward
        assert np.allclose(lhs, rhs, rtol=1e-11, atol=1e-14)

    def test_literal_form_at_short_maturity(self):
        ctx = MarketContext(100.0, 0.02, 0.01, 0.05)
        w = np.linspace(0.1, 20, 40)
        for j in (1, 2):
            assert np.allclose(heston_charfn(j, w, ctx, P), heston_charfn_literal(j, w, ctx, P), rtol=1e-9, atol=1e-14)

    def test_vanishing_vol_of_vol(self):
        # eta -> 0 with theta = v0 leaves a constant variance: Gaussian log price
        p = HestonParams(kappa=1.0, theta=0.04, eta=1e-8, rho=0.0, v0=0.04)
        w = np.linspace(0, 30, 31)
        t = CTX.ttm_years
        mean = math.log(CTX.forward) - 0.02 * t
        ref = np.exp(1j * w * mean - 0.5 * 0.04 * t * w * w)
        assert np.allclose(heston_charfn(2, w, CTX, p), ref, atol=1e-10)

    def test_continuous_in_omega(self, spy_ctx, spy_heston):
        # no branch-cut jumps of the log across a dense grid
        w = np.linspace(0.0, 200.0, 10_000)
        drift = np.exp(1j * w * (math.log(spy_ctx.spot_pv) + spy_ctx.rate * spy_ctx.ttm_years))
        core = heston_charfn(2, w, spy_ctx, spy_heston) / drift
        assert np.abs(np.diff(core)).max() < 1e-2


class TestPricing:
    def test_spy_delta(self, spy_ctx, spy_heston):
        assert heston_delta(spy_ctx, 445.0, spy_heston) == pytest.approx(0.663, abs=0.02)

    @pytest.mark.parametrize("k", [80.0, 100.0, 125.0])
    def test_fixed_rule_matches_adaptive(self, k):
        p1, p2 = heston_probabilities(k, CTX, P)
        assert p1[0] == pytest.approx(heston_pj(1, math.log(k), CTX, P), abs=1e-8)
        assert p2[0] == pytest.approx(heston_pj(2, math.log(k), CTX, P), abs=1e-8)

    @pytest.mark.parametrize("k", [85.0, 100.0, 115.0])
    def test_density_oracle(self, k):
        # price as the discounted payoff integral against the inverted density
        x = np.linspace(math.log(20), math.log(400), 6001)
        dens = heston_density(CTX, P, x).density
        pay = np.maximum(np.exp(x) - k, 0.0)
        ref = CTX.discount * integrate.simpson(pay * dens, x=x)
        assert heston_call(CTX, k, P) == pytest.approx(ref, rel=1e-4)

    def test_p2_is_upper_tail_mass(self):
        k = 105.0
        x = np.linspace(math.log(k), math.log(400), 4001)
        tail = integrate.simpson(heston_density(CTX, P, x).density, x=x)
        assert heston_probabilities(k, CTX, P)[1][0] == pytest.approx(tail, abs=1e-4)

    def test_constant_variance_is_black_scholes(self):
        p = HestonParams(kappa=1.0, theta=0.04, eta=1e-6, rho=0.0, v0=0.04)
        k = np.linspace(70, 140, 15)
        assert np.allclose(heston_call(CTX, k, p), bs_call(CTX, k, BSParams(0.2)), atol=1e-6)

    def test_zero_strike_limit(self):
        assert heston_call(CTX, 0.0, P) == pytest.approx(CTX.spot_pv, rel=1e-15)
        assert heston_call(CTX, 1e-3, P) == pytest.approx(CTX.spot_pv - 1e-3 * CTX.discount, abs=1e-6)

    def test_no_arbitrage_shape(self, spy_ctx, spy_heston):
        k = np.arange(300.0, 560.0, 5.0)
        c = heston_call(spy_ctx, k, spy_heston)
        lower = np.maximum(spy_ctx.spot_pv - k * spy_ctx.discount, 0)
        assert np.all(c >= lower - 1e-8) and np.all(c <= spy_ctx.spot_pv)
        assert np.all(np.diff(c) <= 1e-10)
        assert np.all(np.diff(c, 2) >= -1e-8)

    def test_delta_finite_difference(self):
        h = 0.01
        k = np.array([90.0, 100.0, 110.0])
        up = heston_call(MarketContext(100 + h, 0.02, 0.01, 0.5), k, P)
        dn = heston_call(MarketContext(100 - h, 0.02, 0.01, 0.5), k, P)
        assert np.allclose(heston_delta(CTX, k, P), (up - dn) / (2 * h), atol=1e-5)

    def test_bad_strike(self):
        with pytest.raises(DomainError):
            heston_call(CTX, -5.0, P)
        with pytest.raises(DomainError):
            heston_delta(CTX, 0.0, P)


class TestDensity:
    def test_normalized_and_martingale(self, spy_ctx, spy_heston):
        u = np.linspace(0.3, 1.6, 4001)
        d = heston_standardized_density(spy_ctx, spy_heston, u)
        assert d.integral() == pytest.approx(1.0, abs=1e-4)
        assert np.trapezoid(u * d.density, u) == pytest.approx(1.0, abs=1e-4)

    def test_moments_match_density(self):
        u = np.linspace(0.2, 2.5, 8001)
        mean, var, skew, kurt = heston_moments(CTX, P)
        dm = heston_standardized_density(CTX, P, u).moments()
        assert mean == pytest.approx(1.0, abs=1e-12)
        assert var == pytest.approx(dm[1], rel=1e-4)
        assert skew == pytest.approx(dm[2], abs=1e-3)
        assert kurt == pytest.approx(dm[3], abs=1e-2)

    def test_explosion(self):
        p = HestonParams(kappa=0.5, theta=0.04, eta=2.0, rho=0.9, v0=0.04)
        t4 = moment_explosion_time(4, p)
        assert math.isfinite(t4) and t4 > 0
        with pytest.raises(DomainError):
            heston_moments(MarketContext(100.0, 0.0, 0.0, 2 * t4), p)
        assert moment_explosion_time(2, HestonParams(5.0, 0.04, 0.1, -0.5, 0.04)) == math.inf

    def test_explosion_time_brackets_blowup(self):
        p = HestonParams(kappa=0.5, theta=0.04, eta=2.0, rho=0.9, v0=0.04)
        t4 = moment_explosion_time(4, p)
        before = heston_charfn(2, -4j, MarketContext(100.0, 0.0, 0.0, 0.9 * t4), p)
        assert np.isfinite(before) and abs(before) > 0

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            heston_density(CTX, P, [1.0, 0.5])


def test_param_validation():
    for bad in [dict(kappa=0.0), dict(theta=-1.0), dict(eta=0.0), dict(v0=0.0), dict(rho=1.0)]:
        kw = P.as_dict() | bad
        with pytest.raises(DomainError):
            HestonParams(**kw)
    assert P.feller_ratio == pytest.approx(2 * 2 * 0.04 / 0.25)

"""Integral-transform parameter map and quasi-polynomial verification."""

from fractions import Fraction as F

import pytest

from heunfactor.exactalg import RatFunc, UsageError
from heunfactor.heun import HeunParams, heun_operator
from heunfactor.kstrans import (
    h_poly_ep2,
    ks_double_observation,
    ks_params,
    quasipoly_h,
    verify_quasipoly,
)
from heunfactor.oredop import QuasiFunction


class TestKSMap:
    def test_eps_prime(self):
        p = HeunParams.symbolic()
        ks = ks_params(p, "beta")
        assert ks.primed.epsilon == p.epsilon - p.beta + 1
        assert ks.primed.gamma == p.gamma - p.beta + 1
        assert ks.primed.delta == p.delta - p.beta + 1

    def test_accessory_shift(self):
        p = HeunParams.symbolic()
        ks = ks_params(p, "alpha")
        eta = p.alpha
        want = p.q + (1 - eta) * (p.epsilon + p.delta * p.t
                                  + (p.gamma - eta) * (p.t + 1))
        assert ks.primed.q == want

    def test_condition_preserved(self):
        # primed bundle constructs without tripping the Fuchs validation
        p = HeunParams.symbolic()
        for choice in ("alpha", "beta"):
            ks = ks_params(p, choice)
            lhs = ks.primed.gamma + ks.primed.delta + ks.primed.epsilon
            assert lhs == ks.primed.alpha + ks.primed.beta + 1

    def test_infinity_exponents_set(self):
        p = HeunParams.symbolic()
        ks = ks_params(p, "beta")
        pair = {ks.primed.alpha, ks.primed.beta}
        assert pair == {2 - p.beta, p.alpha - p.beta + 1}

    def test_x1_concrete_bundle(self):
        from heunfactor.xjacobi import x1_heun_params

        p = x1_heun_params(1, F(1), F(1, 4))
        ks = ks_params(p, "beta")
        # eta = beta = k+g+h+1 = 13/4
        assert ks.eta == RatFunc.of(F(13, 4), p.ring)
        assert ks.primed.epsilon == RatFunc.of(-2 - F(13, 4) + 1, p.ring)

    def test_bad_choice(self):
        with pytest.raises(UsageError):
            ks_params(HeunParams.symbolic(), "gamma")

    def test_double_transform_recorded_not_asserted(self):
        p = HeunParams.make(alpha=F(1, 3), beta=F(2, 5), gamma=F(3, 7),
                            epsilon=F(104, 105), q=F(1, 2), t=3)
        once, twice = ks_double_observation(p)
        assert twice.primed.ring == p.ring  # observation only


class TestHPoly:
    def test_leading_coefficient(self):
        p = HeunParams.symbolic(epsilon=-2)
        h = h_poly_ep2(p)
        lead = h.coeffs_in("z")[2]
        assert lead == 2 * p.alpha * (p.alpha + 1)

    def test_alpha_minus1_degenerates(self):
        p = HeunParams.make(alpha=-1, beta=F(1, 3), gamma=F(2, 7),
                            epsilon=-2, q=F(1, 2), t=3)
        h = h_poly_ep2(p)
        cs = h.coeffs_in("z")
        assert 2 not in cs and 1 not in cs
        assert not cs[0].is_zero

    def test_constant_term_at_random_rationals(self):
        vals = dict(alpha=F(2, 3), beta=F(5, 7), gamma=F(1, 6), q=F(3, 4),
                    t=F(9, 5))
        p = HeunParams.make(epsilon=-2, **vals)
        h = h_poly_ep2(p)
        a, b, g, q, t = (vals[n] for n in ("alpha", "beta", "gamma", "q", "t"))
        want = (q * q - ((2 * a * b + 3 * a + b + 1) * t - g + 2) * q
                + a * t * (t * (a + 1) * (b + 1) * (b + 2) - b * g))
        assert h.coeffs_in("z")[0] == RatFunc.of(want, p.ring)


class TestVerifyQuasipoly:
    def test_eps_minus2_displayed_h(self):
        rep = verify_quasipoly(HeunParams.symbolic(epsilon=-2))
        assert rep.passed

    def test_eps_minus2_polytype_h(self):
        rep = verify_quasipoly(HeunParams.symbolic(epsilon=-2),
                               use_display=False)
        assert rep.passed

    def test_eps_minus1_analogue(self):
        rep = verify_quasipoly(HeunParams.symbolic(epsilon=-1))
        assert rep.passed

    def test_broken_apparency_residual_degree(self):
        # without reducing by the apparency ideal the residual survives with
        # q-degree at most 3
        p = HeunParams.symbolic(epsilon=-2)
        ks = ks_params(p, "beta")
        v = QuasiFunction(p.ring, "z", p.beta - p.gamma, p.beta - p.delta,
                          h_poly_ep2(p))
        res = heun_operator(ks.primed).apply_quasi(v).rational_part
        assert not res.is_zero
        assert res.num.degree("q") <= 3

    def test_rescaling_invariance(self):
        p = HeunParams.symbolic(epsilon=-2)
        h = h_poly_ep2(p) * F(7, 3)
        rep = verify_quasipoly(p, h=h)
        assert rep.passed

    def test_quasipoly_h_degree(self):
        from heunfactor.heun import PolySolution

        for eps in (-1, -2, -3):
            p = HeunParams.symbolic(epsilon=eps)
            from heunfactor.heun import apparency_poly

            sol = quasipoly_h(p, modulus=apparency_poly(p))
            assert isinstance(sol, PolySolution)
            assert len(sol.coeffs) == -eps + 1

    def test_eps_minus3_via_polytype(self):
        rep = verify_quasipoly(HeunParams.symbolic(epsilon=-3))
        assert rep.passed

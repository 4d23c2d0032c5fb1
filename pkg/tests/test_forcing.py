import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import circlelab as cl
from circlelab.forcing import (HullPoint, QuasiPeriodicSignal, appendix_series,
                               constant_signal, eval_signal, hull_distance,
                               integral_signal, nl_eval, translate_signal)

from conftest import DYADIC_INTEGRAL_CONSTANT, F0_AT_1, PHI_LOWER_BOUND


class TestEvalSignal:
    def test_appendix_vanishes_at_zero(self, appendix_sig):
        assert eval_signal(appendix_sig, 0.0) == 0.0

    def test_single_mode_peak(self):
        sig = QuasiPeriodicSignal(modes=[(2.0, 1.0, math.pi / 2)])
        assert eval_signal(sig, 0.0) == pytest.approx(2.0, abs=1e-15)

    def test_appendix_at_one_matches_series_oracle(self, appendix_sig):
        assert eval_signal(appendix_sig, 1.0) == pytest.approx(F0_AT_1, abs=1e-13)

    def test_truncation_tail_bound(self):
        # |full - depth-K truncation| <= 2^-K pi on sampled times
        ts = np.linspace(0.0, 50.0, 401)
        full = eval_signal(appendix_series(60), ts)
        for K in (8, 12, 20):
            trunc = eval_signal(appendix_series(K), ts)
            assert np.max(np.abs(full - trunc)) <= 2.0 ** (-K) * math.pi

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            QuasiPeriodicSignal(modes=[(1.0, 0.0, 0.0)])


class TestIntegralSignal:
    def test_empty_integral(self, appendix_sig):
        assert integral_signal(appendix_sig, 0.0) == 0.0

    def test_dyadic_constant(self, appendix_sig):
        for n in range(1, 21):
            F = integral_signal(appendix_sig, 2.0 ** n)
            assert F == pytest.approx(DYADIC_INTEGRAL_CONSTANT, abs=1e-9)
            assert math.exp(F) >= PHI_LOWER_BOUND

    def test_derivative_consistency(self, appendix_sig):
        # centered difference of the integral recovers the signal
        h = 1e-5
        for t in (0.3, 1.7, 9.2, 100.4):
            num = (integral_signal(appendix_sig, t + h)
                   - integral_signal(appendix_sig, t - h)) / (2 * h)
            assert num == pytest.approx(eval_signal(appendix_sig, t), abs=1e-8)

    def test_mode_closed_form(self):
        sig = QuasiPeriodicSignal(modes=[(1.5, 2.0, 0.7)], constant=0.25)
        ts = np.linspace(0.0, 4.0, 100)
        quad = np.array([np.trapezoid(eval_signal(sig, np.linspace(0, t, 4001)),
                                      np.linspace(0, t, 4001)) for t in ts[1:]])
        closed = integral_signal(sig, ts[1:])
        assert np.max(np.abs(quad - closed)) < 1e-6

    def test_boundedness_over_long_horizon(self, appendix_sig):
        ts = np.linspace(0.0, 1e4, 200001)
        F = integral_signal(appendix_sig, ts)
        # every term of the integral is nonpositive, so phi = e^F stays <= 1
        assert np.max(F) <= 1e-12
        phi = np.exp(F)
        # the running maximum stabilizes at the t = 0 value
        assert np.max(phi) == pytest.approx(1.0, abs=1e-12)


class TestTranslate:
    def test_identity(self, appendix_sig):
        t0 = translate_signal(appendix_sig, 0.0)
        ts = np.linspace(-5, 5, 101)
        assert np.max(np.abs(eval_signal(t0, ts) - eval_signal(appendix_sig, ts))) < 1e-14

    def test_translate_is_time_shift(self):
        sig = QuasiPeriodicSignal(modes=[(1.0, 1.3, 0.2), (0.5, 2.9, 1.0)],
                                  constant=0.1)
        tau = 3.7
        ts = np.linspace(-10, 10, 201)
        shifted = translate_signal(sig, tau)
        rel = np.max(np.abs(eval_signal(shifted, ts) - eval_signal(sig, ts + tau)))
        assert rel < 1e-12 * (1 + np.max(np.abs(eval_signal(sig, ts + tau))))

    def test_truncated_series_periodicity(self):
        K = 10
        trunc = translate_signal(appendix_series(K), 0.0)  # materialized, depth K
        moved = translate_signal(trunc, 2.0 ** (K + 1))
        ts = np.linspace(0.0, 100.0, 1001)
        assert np.max(np.abs(eval_signal(moved, ts) - eval_signal(trunc, ts))) < 1e-11

    @given(st.floats(-50, 50), st.floats(-50, 50))
    def test_composition(self, tau1, tau2):
        sig = QuasiPeriodicSignal(modes=[(0.8, 0.9, 0.0), (0.3, 2.2, 0.4)])
        ts = np.linspace(-3, 3, 41)
        once = translate_signal(translate_signal(sig, tau1), tau2)
        both = translate_signal(sig, tau1 + tau2)
        assert np.max(np.abs(eval_signal(once, ts) - eval_signal(both, ts))) < 1e-10


class TestHullDistance:
    def test_identity(self, appendix_sig):
        g = HullPoint(appendix_sig, 4.2)
        assert hull_distance(g, g) == 0.0

    @given(st.floats(-100, 100), st.floats(-100, 100))
    def test_symmetry(self, t1, t2):
        sig = appendix_series()
        g1, g2 = HullPoint(sig, t1), HullPoint(sig, t2)
        assert hull_distance(g1, g2) == pytest.approx(hull_distance(g2, g1), abs=1e-14)

    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
    def test_triangle(self, a, b, c):
        sig = appendix_series()
        ga, gb, gc = (HullPoint(sig, x) for x in (a, b, c))
        assert (hull_distance(ga, gc)
                <= hull_distance(ga, gb) + hull_distance(gb, gc) + 1e-12)

    def test_truncated_periodicity_gives_zero(self):
        K = 10
        base = translate_signal(appendix_series(K), 0.0)
        g1 = HullPoint(base, 0.0)
        g2 = HullPoint(base, 2.0 ** (K + 1))
        assert hull_distance(g1, g2) < 1e-11

    def test_rejects_mixed_families(self, appendix_sig):
        other = QuasiPeriodicSignal(modes=[(1.0, 1.0, 0.0)])
        with pytest.raises(ValueError):
            hull_distance(HullPoint(appendix_sig), HullPoint(other))

    def test_hull_flow_advance(self, appendix_sig):
        g = HullPoint(appendix_sig, 1.0)
        assert g.advance(2.5).offset == 3.5
        ts = np.linspace(0, 3, 31)
        assert np.allclose(g.advance(2.5)(ts), g(ts + 2.5))


class TestNonlinearity:
    def test_appendix_point_values(self, appendix_nl):
        f, fu, fp = nl_eval(appendix_nl, 0.0, 1.0, 0.0)
        assert (f, fu, fp) == (1.0, 1.0, 1.0)

    def test_burgers_point_values(self):
        nl = cl.Nonlinearity(E=constant_signal(-1.0))
        f, fu, fp = nl_eval(nl, 0.37, 2.0, 3.0)
        assert (f, fu, fp) == (-6.0, -3.0, -2.0)

    def test_partials_match_finite_differences(self):
        rng = np.random.default_rng(11)
        sigs = [QuasiPeriodicSignal(
            modes=[(rng.normal(), rng.uniform(0.5, 3.0), rng.uniform(0, 6))],
            constant=rng.normal()) for _ in range(5)]
        nl = cl.Nonlinearity(*sigs)
        h = 1e-6
        for _ in range(20):
            t, u, p = rng.normal(size=3)
            f, fu, fp = nl_eval(nl, t, u, p)
            fu_num = (nl_eval(nl, t, u + h, p)[0] - nl_eval(nl, t, u - h, p)[0]) / (2 * h)
            fp_num = (nl_eval(nl, t, u, p + h)[0] - nl_eval(nl, t, u, p - h)[0]) / (2 * h)
            scale = 1.0 + abs(fu) + abs(fp)
            assert abs(fu - fu_num) / scale < 1e-6
            assert abs(fp - fp_num) / scale < 1e-6

    def test_hull_point_integral(self, appendix_sig):
        g = HullPoint(appendix_sig, 5.0)
        val = g.integral(3.0)
        expected = (integral_signal(appendix_sig, 8.0)
                    - integral_signal(appendix_sig, 5.0))
        assert val == pytest.approx(expected, abs=1e-12)

import numpy as np
import pytest

import circlelab as cl
from circlelab.config import mode_field, random_field
from circlelab.errors import Blowup, MismatchedTrajectories
from circlelab.forcing import HullPoint, Nonlinearity, constant_signal, \
    QuasiPeriodicSignal, integral_signal
from circlelab.spectral import derivative, evolve, evolve_linearized

CONST_HULL = HullPoint(constant_signal(0.0))


def burgers_nl(b=0.1):
    return Nonlinearity(B=constant_signal(b), E=constant_signal(-1.0))


class TestDerivative:
    def test_first_derivative_of_sine(self, grid64, sin_field):
        d = derivative(sin_field, 1)
        assert np.max(np.abs(d.values - np.cos(grid64.x))) < 1e-12

    def test_second_derivative_of_sin3(self, grid64):
        u = mode_field(grid64, {}, {3: 1.0})
        d = derivative(u, 2)
        assert np.max(np.abs(d.values + 9.0 * np.sin(3 * grid64.x))) < 1e-10

    def test_constant_has_zero_derivative(self, grid64):
        u = mode_field(grid64, {}, {}, mean=4.2)
        for order in (1, 2, 3):
            assert np.max(np.abs(derivative(u, order).values)) < 1e-12

    def test_third_derivative(self, grid64):
        u = mode_field(grid64, {2: 1.0}, {})
        d = derivative(u, 3)
        assert np.max(np.abs(d.values - 8.0 * np.sin(2 * grid64.x))) < 1e-9


class TestEvolve:
    def test_appendix_closed_form_short(self, grid64, sin_field, appendix_sig,
                                        appendix_nl):
        traj = evolve(sin_field, HullPoint(appendix_sig), appendix_nl,
                      t_end=2.0, dt=1e-3, stride=200)
        F = integral_signal(appendix_sig, 2.0)
        exact = np.exp(F) * np.sin(grid64.x + 2.0)
        rel = np.max(np.abs(traj.states[-1] - exact)) / np.exp(F)
        assert rel < 1e-8

    def test_zero_equilibrium(self, grid64, zero_field, appendix_sig, appendix_nl):
        traj = evolve(zero_field, HullPoint(appendix_sig), appendix_nl,
                      t_end=1.0, dt=1e-2, stride=10)
        assert np.max(np.abs(traj.states)) == 0.0

    def test_homogeneous_matches_scalar_ode(self, grid64):
        # u' = B(t) u + C u^3 + D with a quasi-periodic B, against DOP853
        from scipy.integrate import solve_ivp
        B = QuasiPeriodicSignal(modes=[(0.4, 1.3, 0.0)], constant=0.3)
        nl = Nonlinearity(B=B, C=constant_signal(-1.0), D=constant_signal(0.2))
        u0 = mode_field(grid64, {}, {}, mean=0.4)
        traj = evolve(u0, CONST_HULL, nl, t_end=5.0, dt=1e-3, stride=500)

        def rhs(t, y):
            b = 0.3 + 0.4 * np.sin(1.3 * t)
            return b * y - y ** 3 + 0.2

        sol = solve_ivp(rhs, (0, 5.0), [0.4], method="DOP853",
                        rtol=1e-12, atol=1e-14)
        spread = np.max(traj.states[-1]) - np.min(traj.states[-1])
        assert spread == 0.0
        assert abs(traj.states[-1][0] - sol.y[0, -1]) < 1e-7

    def test_blowup_detected(self, grid64):
        nl = Nonlinearity(C=constant_signal(1.0))
        u0 = mode_field(grid64, {}, {}, mean=2.0)
        with pytest.raises(Blowup):
            evolve(u0, CONST_HULL, nl, t_end=5.0, dt=1e-3, stride=10)

    def test_determinism_bit_identical(self, grid64):
        u0 = random_field(grid64, 3, 5)
        t1 = evolve(u0, CONST_HULL, burgers_nl(), t_end=1.0, dt=1e-3, stride=100)
        t2 = evolve(u0, CONST_HULL, burgers_nl(), t_end=1.0, dt=1e-3, stride=100)
        assert np.array_equal(t1.states, t2.states)

    def test_stride_and_final_sample(self, grid64, sin_field):
        traj = evolve(sin_field, CONST_HULL, burgers_nl(), t_end=0.25,
                      dt=1e-3, stride=100)
        assert list(traj.times) == pytest.approx([0.0, 0.1, 0.2, 0.25])

    def test_translation_equivariance(self, grid64):
        u0 = random_field(grid64, 5, 6)
        cells = 9
        a = cells * grid64.spacing
        t1 = evolve(cl.shift(u0, a), CONST_HULL, burgers_nl(), 2.0, 1e-3, stride=2000)
        t0 = evolve(u0, CONST_HULL, burgers_nl(), 2.0, 1e-3, stride=2000)
        shifted_after = cl.shift(t0.field(len(t0) - 1), a)
        assert np.max(np.abs(t1.states[-1] - shifted_after.values)) < 1e-8

    def test_fourth_order_convergence(self, grid64, sin_field, appendix_sig,
                                      appendix_nl):
        errs = []
        for dt in (0.04, 0.02):
            traj = evolve(sin_field, HullPoint(appendix_sig), appendix_nl,
                          t_end=4.0, dt=dt, stride=int(round(4.0 / dt)))
            F = integral_signal(appendix_sig, 4.0)
            exact = np.exp(F) * np.sin(grid64.x + 4.0)
            errs.append(np.max(np.abs(traj.states[-1] - exact)))
        assert errs[0] / errs[1] >= 8.0


class TestEvolveLinearized:
    def test_appendix_self_linearization(self, grid64, zero_field, sin_field,
                                         appendix_sig, appendix_nl):
        base = evolve(zero_field, HullPoint(appendix_sig), appendix_nl,
                      t_end=3.0, dt=1e-3, stride=1)
        tan = evolve_linearized(base, sin_field)
        F = integral_signal(appendix_sig, 3.0)
        exact = np.exp(F) * np.sin(grid64.x + 3.0)
        rel = np.max(np.abs(tan.states[-1] - exact)) / np.exp(F)
        assert rel < 1e-10

    def test_constant_coefficient_decay(self, grid64, zero_field):
        c0 = 0.5
        nl = Nonlinearity(B=constant_signal(c0))
        base = evolve(zero_field, CONST_HULL, nl, t_end=1.0, dt=1e-3, stride=1)
        psi0 = mode_field(grid64, {}, {2: 1.0})
        tan = evolve_linearized(base, psi0)
        exact = np.exp((c0 - 4.0) * 1.0) * np.sin(2 * grid64.x)
        rel = np.max(np.abs(tan.states[-1] - exact)) / np.exp(c0 - 4.0)
        assert rel < 1e-8

    def test_tangent_consistency_with_nonlinear_solver(self, grid64):
        u0 = random_field(grid64, 8, 5, sup=0.8)
        psi0 = random_field(grid64, 9, 4)
        nl = burgers_nl()
        base = evolve(u0, CONST_HULL, nl, t_end=1.0, dt=1e-3, stride=1)
        tan = evolve_linearized(base, psi0)
        eps = 1e-6
        bumped = cl.Field(grid64, u0.values + eps * psi0.values)
        t_pert = evolve(bumped, CONST_HULL, nl, t_end=1.0, dt=1e-3, stride=1000)
        fd = (t_pert.states[-1] - base.states[-1]) / eps
        rel = (np.max(np.abs(tan.states[-1] - fd))
               / max(np.max(np.abs(fd)), 1e-300))
        assert rel < 1e-4

    def test_linearity(self, grid64, zero_field, appendix_sig, appendix_nl):
        base = evolve(zero_field, HullPoint(appendix_sig), appendix_nl,
                      t_end=0.5, dt=1e-3, stride=1)
        p1 = mode_field(grid64, {1: 1.0}, {})
        p2 = mode_field(grid64, {}, {3: 1.0})
        alpha, beta = 0.7, -1.3
        combo = cl.Field(grid64, alpha * p1.values + beta * p2.values)
        t_combo = evolve_linearized(base, combo)
        t1 = evolve_linearized(base, p1)
        t2 = evolve_linearized(base, p2)
        lhs = t_combo.states[-1]
        rhs = alpha * t1.states[-1] + beta * t2.states[-1]
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * max(np.max(np.abs(rhs)), 1.0)

    def test_requires_stride_one_base(self, grid64, sin_field):
        base = evolve(sin_field, CONST_HULL, burgers_nl(), 0.1, 1e-3, stride=10)
        with pytest.raises(MismatchedTrajectories):
            evolve_linearized(base, sin_field)

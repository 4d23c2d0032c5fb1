import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import circlelab as cl
from circlelab.config import mode_field, random_field
from circlelab.errors import DegenerateField, MismatchedTrajectories
from circlelab.forcing import HullPoint, Nonlinearity, constant_signal, \
    integral_signal
from circlelab.spectral import evolve, shift_values
from circlelab.zeros import monitor_difference, simple_zero_certificate, \
    zero_number

CONST_HULL = HullPoint(constant_signal(0.0))


class TestZeroNumber:
    def test_sin3x(self, grid64):
        zc = zero_number(mode_field(grid64, {}, {3: 1.0}), 1e-9)
        assert zc.count == 6 and zc.all_simple and not zc.ambiguous
        assert zc.min_crossing_slope == pytest.approx(3.0, rel=1e-9)

    def test_constant_one(self, grid64):
        zc = zero_number(mode_field(grid64, {}, {}, mean=1.0), 1e-9)
        assert zc.count == 0 and not zc.ambiguous

    def test_shifted_sine_crosses_twice(self, grid64):
        zc = zero_number(mode_field(grid64, {}, {1: 1.0}, mean=0.5), 1e-9)
        assert zc.count == 2 and zc.all_simple

    def test_zero_field_degenerate(self, grid64):
        with pytest.raises(DegenerateField):
            zero_number(mode_field(grid64, {}, {}), 1e-9)

    def test_exact_double_zero_not_certified(self, grid64):
        u = mode_field(grid64, {1: -1.0}, {}, mean=1.0)  # 1 - cos x
        zc = zero_number(u, 1e-9)
        ok, _, _ = simple_zero_certificate(u, 1e-9)
        assert zc.ambiguous or not ok

    def test_near_tangency_has_small_slope(self, grid64):
        # sin^2 x - eps = (1 - cos 2x)/2 - eps: four near-tangent crossings
        eps = 1e-2
        u = mode_field(grid64, {2: -0.5}, {}, mean=0.5 - eps)
        zc = zero_number(u, 1e-12)
        assert zc.count == 4
        assert zc.min_crossing_slope < 3.0 * np.sqrt(eps)

    @given(st.integers(0, 10_000))
    def test_parity(self, seed):
        grid = cl.CircleGrid(64)
        u = random_field(grid, seed, 6)
        try:
            zc = zero_number(u, 1e-9 * u.sup_norm)
        except DegenerateField:
            return
        if not zc.ambiguous:
            assert zc.count % 2 == 0

    def test_shift_invariance_all_grid_shifts(self, grid64):
        u = random_field(grid64, 42, 5)
        base = zero_number(u, 1e-9).count
        for cells in range(grid64.n):
            rolled = cl.Field(grid64, shift_values(u.values, cells))
            assert zero_number(rolled, 1e-9).count == base

    def test_stability_radius(self, grid64):
        u = mode_field(grid64, {}, {3: 1.0, 1: 0.2})
        ok, _, radius = simple_zero_certificate(u, 1e-9)
        assert ok and radius > 0
        base = zero_number(u, 1e-9).count
        rng = np.random.default_rng(0)
        for _ in range(50):
            pert = random_field(grid64, int(rng.integers(1 << 30)), 8,
                                sup=radius * 0.999)
            bumped = cl.Field(grid64, u.values + pert.values)
            assert zero_number(bumped, 1e-9).count == base


class TestMonitorDifference:
    def test_appendix_pair_constant_count(self, grid64, appendix_sig, appendix_nl):
        # difference of sin x and 2 sin x solutions is -e^F sin(x+t): z = 2
        g = HullPoint(appendix_sig)
        u1 = mode_field(grid64, {}, {1: 1.0})
        u2 = mode_field(grid64, {}, {1: 2.0})
        t1 = evolve(u1, g, appendix_nl, 5.0, 1e-3, stride=50)
        t2 = evolve(u2, g, appendix_nl, 5.0, 1e-3, stride=50)
        series = monitor_difference(t1, t2)
        counts = [zc.count for zc in series.counts if zc is not None]
        assert counts and all(c == 2 for c in counts)
        assert not series.drop_events and not series.violations

    def test_homogeneous_pair_zero_count(self, grid64):
        nl = Nonlinearity(B=constant_signal(-1.0), D=constant_signal(0.2))
        t1 = evolve(mode_field(grid64, {}, {}, mean=0.3), CONST_HULL, nl,
                    4.0, 1e-3, stride=100)
        t2 = evolve(mode_field(grid64, {}, {}, mean=0.9), CONST_HULL, nl,
                    4.0, 1e-3, stride=100)
        series = monitor_difference(t1, t2)
        counts = [zc.count for zc in series.counts if zc is not None]
        assert counts and all(c == 0 for c in counts)

    def test_burgers_pair_drops_without_violations(self, grid64):
        nl = Nonlinearity(B=constant_signal(0.1), E=constant_signal(-1.0))
        u1 = random_field(grid64, 21, 6)
        # second state differs by a mode-4-dominated bump, so the difference
        # starts with eight zeros and must shed pairs as diffusion wins
        bump = mode_field(grid64, {}, {4: 0.5, 1: 0.05})
        u2 = cl.Field(grid64, u1.values + bump.values)
        t1 = evolve(u1, CONST_HULL, nl, 20.0, 2e-3, stride=25)
        t2 = evolve(u2, CONST_HULL, nl, 20.0, 2e-3, stride=25)
        series = monitor_difference(t1, t2)
        assert not series.violations
        first = next(zc.count for zc in series.counts if zc is not None)
        assert first >= 6
        assert series.drop_events  # diffusion kills high harmonics in [0, 20]
        assert series.last_drop_time == series.drop_events[-1][0]

    def test_mismatched_metadata_rejected(self, grid64, sin_field):
        nl = Nonlinearity(B=constant_signal(0.1))
        t1 = evolve(sin_field, CONST_HULL, nl, 1.0, 1e-3, stride=100)
        t2 = evolve(sin_field, CONST_HULL, nl, 1.0, 2e-3, stride=50)
        with pytest.raises(MismatchedTrajectories):
            monitor_difference(t1, t2)

"""Robust zero counting on the circle and the non-increase monitor.

Counting is sign-change based on the trigonometric interpolant: transversal
crossings on a loop pair up, so a fully resolved count is even.  Cells whose
endpoints sit inside the tolerance band are refined by 8x interpolation up to
depth 4; what still cannot be resolved is flagged ambiguous rather than
guessed, because fixed tolerances mislead exactly at the multiple zeros where
the count drops.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateField, MismatchedTrajectories
from .spectral import Field, Trajectory, interpolate_spectrum

REFINE_FACTOR = 8
MAX_REFINE_DEPTH = 4
DEFAULT_REL_TOL = 1e-9
# Samples below this fraction of the pair scale are too close to roundoff for
# a meaningful count; the monitor marks them ambiguous instead of counting noise.
MONITOR_NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class ZeroCount:
    count: int
    all_simple: bool
    min_crossing_slope: float
    ambiguous: bool
    stability_radius: float = 0.0


@dataclass(frozen=True)
class ZeroSeries:
    times: np.ndarray
    counts: list
    drop_events: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def last_drop_time(self):
        """Empirical onset of constancy: time of the last observed drop."""
        return self.drop_events[-1][0] if self.drop_events else None


def default_tol(u: Field) -> float:
    return DEFAULT_REL_TOL * u.sup_norm


def _locate_crossing(grid, uhat, xl, xr, vl, vr):
    """Bisection for the sign change of the interpolant in [xl, xr]."""
    for _ in range(60):
        xm = 0.5 * (xl + xr)
        vm = interpolate_spectrum(grid, uhat, xm)
        if vm == 0.0:
            return xm
        if (vm > 0.0) == (vl > 0.0):
            xl, vl = xm, vm
        else:
            xr, vr = xm, vm
        if xr - xl < 1e-14:
            break
    return 0.5 * (xl + xr)


def zero_number(u: Field, tol: float | None = None) -> ZeroCount:
    """Count sign changes of the interpolant around the circle.

    Raises DegenerateField when sup|u| < tol (the zero set is not finite).
    ``all_simple`` holds iff every detected crossing has interpolated slope
    |u_x| >= tol; the certificate radius is min_slope * cell / 4.
    """
    if tol is None:
        tol = default_tol(u)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if u.sup_norm < tol:
        raise DegenerateField("field below tolerance everywhere")

    grid = u.grid
    uhat = u.spectrum()
    xs = list(grid.x)
    vs = list(u.values)

    # Refine cells adjacent to small samples until signs resolve or depth 4.
    cell = grid.spacing
    for _ in range(MAX_REFINE_DEPTH):
        small = [abs(v) < tol for v in vs]
        if not any(small):
            break
        new_xs: list[float] = []
        new_vs: list[float] = []
        m = len(xs)
        for i in range(m):
            new_xs.append(xs[i])
            new_vs.append(vs[i])
            nxt = (i + 1) % m
            if small[i] or small[nxt]:
                right = xs[nxt] if nxt else xs[0] + 2.0 * np.pi
                sub = xs[i] + (right - xs[i]) / REFINE_FACTOR * np.arange(1, REFINE_FACTOR)
                vals = interpolate_spectrum(grid, uhat, sub)
                new_xs.extend(sub.tolist())
                new_vs.extend(np.asarray(vals).tolist())
        xs, vs = new_xs, new_vs
        cell /= REFINE_FACTOR

    varr = np.asarray(vs)
    xarr = np.asarray(xs)
    big = np.abs(varr) >= tol

    # Ambiguity: a leftover small run is harmless only when it is a single
    # sample pinched between opposite signs (an exactly-hit simple zero).
    ambiguous = False
    m = len(vs)
    idx_big = np.flatnonzero(big)
    if idx_big.size == 0:
        raise DegenerateField("field below tolerance everywhere after refinement")
    if idx_big.size < m:
        for a, b in _small_runs(big):
            run_len = (b - a) % m
            left = varr[(a - 1) % m]
            right = varr[b % m]
            opposite = (left > 0.0) != (right > 0.0)
            if not (run_len == 1 and opposite):
                ambiguous = True
                break

    signs = varr[idx_big] > 0.0
    flips = np.flatnonzero(signs != np.roll(signs, -1))
    count = int(flips.size)

    # Slope at each counted crossing, from the interpolant.
    min_slope = np.inf
    all_simple = True
    for f in flips:
        i = idx_big[f]
        jn = idx_big[(f + 1) % idx_big.size]
        xl, vl = xarr[i], varr[i]
        xr, vr = xarr[jn], varr[jn]
        if xr <= xl:
            xr += 2.0 * np.pi
        x0 = _locate_crossing(grid, uhat, xl, xr, vl, vr)
        slope = abs(float(interpolate_spectrum(grid, uhat, x0, deriv=1)))
        min_slope = min(min_slope, slope)
        if slope < tol:
            all_simple = False
    if count == 0:
        min_slope = 0.0
    if ambiguous:
        all_simple = False
    radius = 0.0 if (count == 0 or not np.isfinite(min_slope)) else min_slope * cell / 4.0
    return ZeroCount(count=count, all_simple=all_simple,
                     min_crossing_slope=float(min_slope) if count else 0.0,
                     ambiguous=ambiguous, stability_radius=radius)


def _small_runs(big: np.ndarray):
    """Maximal cyclic runs of non-big samples, as half-open index pairs."""
    m = big.size
    runs = []
    i = 0
    while i < m:
        if not big[i]:
            j = i
            while not big[j % m] and j - i < m:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    # merge a wrap-around run
    if len(runs) >= 2 and runs[0][0] == 0 and runs[-1][1] % m == 0 and runs[-1][0] != 0:
        first = runs.pop(0)
        last = runs.pop()
        runs.append((last[0], last[1] + first[1]))
    return runs


def simple_zero_certificate(u: Field, tol: float | None = None):
    """(all zeros simple?, minimal crossing slope); exposes the radius too.

    When the certificate holds, perturbations below min_slope * cell / 4 in
    sup norm cannot change the count.
    """
    zc = zero_number(u, tol)
    return zc.all_simple, zc.min_crossing_slope, zc.stability_radius


def monitor_difference(traj1: Trajectory, traj2: Trajectory,
                       tol_rel: float = DEFAULT_REL_TOL) -> ZeroSeries:
    """Zero series of the difference of two solutions of one equation.

    The count at non-ambiguous samples must never increase; any increase is
    recorded in ``violations`` (the test suites treat that as a hard failure).
    Samples whose difference has collapsed to the roundoff floor are skipped
    as ambiguous.
    """
    if not traj1.compatible_with(traj2):
        raise MismatchedTrajectories("trajectories differ in grid/forcing/dt/times")
    noise_floor = MONITOR_NOISE_FLOOR * max(
        float(np.max(np.abs(traj1.states))), float(np.max(np.abs(traj2.states))), 1e-300)
    counts = []
    drop_events = []
    violations = []
    prev = None  # (t, count) at last non-ambiguous sample
    for i in range(len(traj1)):
        diff = traj1.states[i] - traj2.states[i]
        sup = float(np.max(np.abs(diff)))
        t = float(traj1.times[i])
        if sup < max(noise_floor, 1e-300):
            counts.append(None)
            continue
        try:
            zc = zero_number(Field(traj1.grid, diff), tol_rel * sup)
        except DegenerateField:
            counts.append(None)
            continue
        counts.append(zc)
        if zc.ambiguous:
            continue
        if prev is not None:
            if zc.count < prev[1]:
                drop_events.append((t, prev[1], zc.count))
            elif zc.count > prev[1]:
                violations.append((t, prev[1], zc.count))
        prev = (t, zc.count)
    return ZeroSeries(times=traj1.times.copy(), counts=counts,
                      drop_events=drop_events, violations=violations)

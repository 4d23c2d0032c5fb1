"""The circle action on profiles and the induced orbit (quotient) geometry.

The sup norm is invariant under rotations, so both directed Hausdorff
distances between two group orbits collapse to min_a ||u - sigma_a v||; the
orbit scan below exploits that, scanning all grid rotations and refining the
minimizer within one cell by golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forcing import HullPoint, hull_distance
from .spectral import Field, shift_values

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OrbitDistanceResult:
    distance: float
    best_shift: float


@dataclass(frozen=True)
class PeriodReport:
    L: float
    homogeneous: bool
    active_modes: tuple


def shift(u: Field, a: float) -> Field:
    """(sigma_a u)(x) = u(x + a); exact roll on-grid, Fourier phase off-grid."""
    grid = u.grid
    cells = a / grid.spacing
    nearest = round(cells)
    if abs(cells - nearest) < 1e-12:
        return Field(grid, shift_values(u.values, int(nearest) % grid.n))
    spec = u.spectrum()
    uhat = spec * np.exp(1j * grid.k * a)
    uhat[-1] = spec[-1] * np.cos(grid.k[-1] * a)
    return Field(grid, grid.to_physical(uhat))


def _all_rolls(values: np.ndarray) -> np.ndarray:
    """Matrix whose row j is the rotation by j cells."""
    n = values.size
    idx = (np.arange(n)[None, :] + np.arange(n)[:, None]) % n
    return values[idx]


def grid_orbit_distances(u: Field, v: Field) -> np.ndarray:
    """sup-norm distance from u to every grid rotation of v."""
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    return np.max(np.abs(u.values[None, :] - _all_rolls(v.values)), axis=1)


def orbit_distance(u: Field, v: Field, refine: bool = True) -> OrbitDistanceResult:
    """min over rotations a of ||u - sigma_a v||_sup, with the minimizing
    shift refined to sub-grid accuracy.

    Equals the Hausdorff distance between the two group orbits (the shift
    invariance of the norm collapses both directed distances to this min).
    """
    d = grid_orbit_distances(u, v)
    j = int(np.argmin(d))
    h = u.grid.spacing
    best_a = j * h
    best_d = float(d[j])
    if not refine:
        return OrbitDistanceResult(best_d, best_a % (2.0 * np.pi))

    def objective(a: float) -> float:
        # Sample |u - sigma_a v| on both natural grids so the objective is
        # exactly symmetric under (u, v, a) <-> (v, u, -a).
        s1 = float(np.max(np.abs(u.values - shift(v, a).values)))
        s2 = float(np.max(np.abs(shift(u, -a).values - v.values)))
        return max(s1, s2)

    # Seed a dense scan of the two cells around the discrete minimizer, then
    # golden-section; the objective is piecewise smooth in the shift.
    lo, hi = best_a - h, best_a + h
    seeds = np.linspace(lo, hi, 17)
    seed_vals = [objective(a) for a in seeds]
    jbest = int(np.argmin(seed_vals))
    if seed_vals[jbest] < best_d:
        best_d = seed_vals[jbest]
        best_a = float(seeds[jbest])
    lo = float(seeds[max(jbest - 1, 0)])
    hi = float(seeds[min(jbest + 1, len(seeds) - 1)])
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    for _ in range(80):
        if hi - lo < 1e-13:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = objective(x2)
    for a in (x1, x2, 0.5 * (lo + hi)):
        fa = objective(a)
        if fa < best_d:
            best_d, best_a = fa, float(a)
    return OrbitDistanceResult(best_d, best_a % (2.0 * np.pi))


def quotient_distance(u: Field, g1: HullPoint, v: Field, g2: HullPoint,
                      window: float | None = None, depth: int | None = None) -> float:
    """Orbit distance plus hull distance: the induced product metric."""
    kwargs = {}
    if window is not None:
        kwargs["window"] = window
    if depth is not None:
        kwargs["depth"] = depth
    return orbit_distance(u, v).distance + hull_distance(g1, g2, **kwargs)


def spatial_period(u: Field, amp_tol: float = 1e-8) -> PeriodReport:
    """Smallest common spatial period from the active Fourier modes.

    L = 2 pi / gcd of the active mode indices; a field with no active nonzero
    mode is homogeneous and gets L = 2 pi by convention.
    """
    if amp_tol <= 0.0:
        raise ValueError("amp_tol must be positive")
    amps = np.abs(u.spectrum())
    a_max = float(np.max(amps))
    if a_max == 0.0:
        return PeriodReport(L=2.0 * np.pi, homogeneous=True, active_modes=())
    active = [k for k in range(1, amps.size) if amps[k] >= amp_tol * a_max]
    if not active:
        return PeriodReport(L=2.0 * np.pi, homogeneous=True, active_modes=())
    g = 0
    for k in active:
        g = math.gcd(g, k)
    return PeriodReport(L=2.0 * np.pi / g, homogeneous=False,
                        active_modes=tuple(active))


def is_homogeneous(u: Field, tol: float = 1e-6) -> bool:
    """True iff the field is constant at resolution tol (relative form)."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    spread = float(np.max(u.values) - np.min(u.values))
    return spread < tol * (1.0 + u.sup_norm)

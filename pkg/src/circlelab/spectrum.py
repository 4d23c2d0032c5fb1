"""Lyapunov exponent estimation and dimension counts for the linearized flow.

A small orthonormal frame of tangent fields is propagated by the exact
Jacobian of the nonlinear stepping and re-orthonormalized periodically
(discrete QR / Benettin); the time-averaged log diagonal growth rates
estimate the leading exponents.  Exponents stand in for spectrum interval
locations only under regularity, so reports label them estimates.  The
center band eps_c turns the estimates into unstable/center counts and the
evenized unstable dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Degenerate
from .spectral import Field, Stepper, Trajectory
from .zeros import zero_number

DEFAULT_EPS_C = 0.05
DEFAULT_REORTH_EVERY = 10
DEFAULT_FRAME_SIZE = 5
DEFAULT_WINDOW = 2000.0
_COLLAPSE_FLOOR = 1e-300


@dataclass(frozen=True)
class SpectrumEstimate:
    exponents: np.ndarray        # descending, per unit time
    window: float
    stderr: np.ndarray           # last-half vs full-window discrepancy
    center_band: float
    dim_u: int
    dim_c: int
    N_u: int


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal tangent fields (discrete QR method carrier)."""

    vectors: tuple

    @property
    def m(self) -> int:
        return len(self.vectors)


def random_frame(grid, m: int, seed: int = 0) -> TangentFrame:
    """Seeded random orthonormal frame in the discrete L2 product."""
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((grid.n, m))
    q, _ = np.linalg.qr(mat)
    return TangentFrame(tuple(Field(grid, q[:, i]) for i in range(m)))


def classify_spectrum(exponents, eps_c: float = DEFAULT_EPS_C):
    """(dim_u, dim_c, N_u) from a descending exponent list and center band."""
    lam = np.asarray(exponents, dtype=float)
    if lam.size > 1 and np.any(np.diff(lam) > 0):
        raise ValueError("exponents must be sorted descending")
    dim_u = int(np.sum(lam > eps_c))
    dim_c = int(np.sum(np.abs(lam) <= eps_c))
    n_u = dim_u if dim_u % 2 == 0 else dim_u + 1
    return dim_u, dim_c, n_u


def lyapunov_exponents(base: Trajectory, m: int = DEFAULT_FRAME_SIZE,
                       reorth_every: int = DEFAULT_REORTH_EVERY,
                       window: float = DEFAULT_WINDOW,
                       eps_c: float = DEFAULT_EPS_C,
                       frame: TangentFrame | None = None,
                       seed: int = 0) -> SpectrumEstimate:
    """Leading Lyapunov exponents of the linearized flow along ``base``.

    The base trajectory must be stride-1; the averaging horizon is
    min(window, base duration).  Raises Degenerate when a frame vector
    collapses below 1e-300 between re-orthonormalizations.
    """
    grid = base.grid
    if base.stride != 1:
        raise ValueError("lyapunov_exponents needs a stride-1 base trajectory")
    if m > grid.n // 4:
        raise ValueError("frame size m must not exceed n_points / 4")
    if frame is None:
        frame = random_frame(grid, m, seed=seed)
    if frame.m != m:
        raise ValueError("frame size disagrees with m")

    duration = float(base.times[-1] - base.times[0])
    n_steps = min(int(round(window / base.dt)), len(base) - 1)
    if n_steps < reorth_every:
        raise ValueError("window shorter than one re-orthonormalization interval")

    stepper = Stepper(grid, base.nonlinearity, base.forcing, base.dt, n_steps,
                      t0=float(base.times[0]), dealias=base.dealiased)
    psihat = np.stack([grid.to_spectral(v.values) for v in frame.vectors])

    log_sums = []           # per-interval log growth of the diagonal
    interval_steps = []
    last_reorth = 0
    for i in range(n_steps):
        uhat = grid.to_spectral(base.states[i])
        _, stages = stepper.step(uhat, i)
        psihat = stepper.tangent_step(stages, psihat, i)
        if (i + 1) % reorth_every == 0 or (i + 1) == n_steps:
            phys = np.stack([grid.to_physical(psihat[r]) for r in range(m)])
            q, r = np.linalg.qr(phys.T)
            diag = np.abs(np.diag(r))
            if np.any(diag < _COLLAPSE_FLOOR):
                raise Degenerate("tangent vector collapsed; raise reorth frequency")
            log_sums.append(np.log(diag))
            interval_steps.append(i + 1 - last_reorth)
            last_reorth = i + 1
            psihat = np.stack([grid.to_spectral(q[:, rr]) for rr in range(m)])

    logs = np.array(log_sums)
    steps = np.array(interval_steps)
    t_total = n_steps * base.dt
    lam = logs.sum(axis=0) / t_total
    half = logs.shape[0] // 2
    t_half = steps[half:].sum() * base.dt
    lam_half = logs[half:].sum(axis=0) / max(t_half, base.dt)
    stderr = np.abs(lam - lam_half)

    order = np.argsort(-lam)
    lam = lam[order]
    stderr = stderr[order]
    dim_u, dim_c, n_u = classify_spectrum(lam, eps_c)
    return SpectrumEstimate(exponents=lam, window=min(window, duration),
                            stderr=stderr, center_band=eps_c,
                            dim_u=dim_u, dim_c=dim_c, N_u=n_u)


@dataclass(frozen=True)
class ZeroBoundsReport:
    n1: int
    n2: int
    N1: int
    N2: int
    trials: int
    failures: tuple
    ambiguous: int
    passed: bool


def _band_bounds(n1: int, n2: int):
    """Zero-count bounds for the span of Fourier modes n1..n2.

    dim of the span of modes 0..k is 2k + 1; the lower bound rounds the
    dimension below the band up to even, the upper bound rounds the
    dimension through the band down to even.
    """
    d1 = 0 if n1 == 0 else 2 * (n1 - 1) + 1
    n_lower = d1 if d1 % 2 == 0 else d1 + 1
    d2 = 2 * n2 + 1
    n_upper = d2 if d2 % 2 == 0 else d2 - 1
    return n_lower, n_upper


def mode_zero_bounds_check(n1: int, n2: int, trials: int = 1000,
                           grid=None, seed: int = 0,
                           tol_rel: float = 1e-9) -> ZeroBoundsReport:
    """Check N1 <= z(v) <= N2 on random members of a Fourier mode band.

    Draws nonzero Gaussian combinations of cos kx, sin kx for k in n1..n2 on
    the constant-coefficient model and counts zeros; ambiguous counts (near
    tangencies) are recorded but not failed.
    """
    if not (0 <= n1 <= n2):
        raise ValueError("need 0 <= n1 <= n2")
    if n2 > 6:
        raise ValueError("band check is meant for small bands (n2 <= 6)")
    from .spectral import CircleGrid
    if grid is None:
        grid = CircleGrid(256)
    lower, upper = _band_bounds(n1, n2)
    rng = np.random.default_rng(seed)
    failures = []
    ambiguous = 0
    for trial in range(trials):
        v = np.zeros(grid.n)
        for k in range(n1, n2 + 1):
            a, b = rng.standard_normal(2)
            if k == 0:
                v += a
            else:
                v += a * np.cos(k * grid.x) + b * np.sin(k * grid.x)
        f = Field(grid, v)
        zc = zero_number(f, tol_rel * max(f.sup_norm, 1e-300))
        if zc.ambiguous:
            ambiguous += 1
            continue
        if not (lower <= zc.count <= upper):
            failures.append((trial, zc.count))
    return ZeroBoundsReport(n1=n1, n2=n2, N1=lower, N2=upper, trials=trials,
                            failures=tuple(failures), ambiguous=ambiguous,
                            passed=not failures)

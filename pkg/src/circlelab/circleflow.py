"""Phase reduction of rotating solutions to a forced circle flow.

The phase of an inhomogeneous profile is read off its spatial maximum: the
normalized reference profile has its maximum at x = 0, and the observed state
at time t is that reference rotated by c(t).  Tracking the argmax therefore
gives c(t) = -argmax (mod L) up to the constant choice of reference, and the
phase obeys the reduced scalar equation

    dc/dt = G(t, c),
    G(t,z) = f_p + (u_xxx + f_u u_x) / u_xx   evaluated at x = -z,

which is the time derivative of the argmax condition u_x(t, -c(t)) = 0 along
the flow.  G is L-periodic in z and needs |u_xx| bounded away from zero at
the tracked maximum (the nondegeneracy of the profile peak).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FlatField, InsufficientData, NearSingular, UnwrapFailure
from .forcing import Nonlinearity, nl_eval
from .spectral import Field, Trajectory, interpolate_spectrum
from .symmetry import is_homogeneous, orbit_distance
from .forcing import hull_distance

DEFAULT_FLAT_TOL = 1e-10
DEFAULT_EPS_G_REL = 1e-6


@dataclass(frozen=True)
class PhaseTrack:
    times: np.ndarray
    c: np.ndarray
    cdot: np.ndarray  # NaN at the two endpoints
    L: float
    max_values: np.ndarray
    phixx_at_max: np.ndarray


@dataclass(frozen=True)
class ReductionReport:
    times: np.ndarray
    residuals: np.ndarray  # NaN where G was singular or at endpoints
    ode_residual_max: float
    flagged_times: tuple
    fiber_pairs: tuple  # (t_i, t_j, hull_distance, orbit_distance)
    fiber_orbit_max: float


@dataclass(frozen=True)
class AlmostPeriodReport:
    accepted: np.ndarray
    max_gap: float
    eps: float
    tau_spacing: float
    max_period: float


def max_value(u: Field, flat_tol: float = DEFAULT_FLAT_TOL):
    """Maximum of the trigonometric interpolant and its location.

    The grid argmax seeds a three-node quadratic fit, polished by Newton on
    the interpolant derivative.  Raises FlatField for homogeneous fields.
    """
    if is_homogeneous(u, flat_tol):
        raise FlatField()
    grid = u.grid
    uhat = u.spectrum()
    j = int(np.argmax(u.values))
    h = grid.spacing
    xj = grid.x[j]
    vm = u.values[(j - 1) % grid.n]
    v0 = u.values[j]
    vp = u.values[(j + 1) % grid.n]
    denom = vm - 2.0 * v0 + vp
    x_star = xj if denom == 0.0 else xj + 0.5 * h * (vm - vp) / denom
    for _ in range(12):
        d1 = interpolate_spectrum(grid, uhat, x_star, deriv=1)
        d2 = interpolate_spectrum(grid, uhat, x_star, deriv=2)
        if d2 >= 0.0 or not np.isfinite(d1):
            break
        step = d1 / d2
        x_new = x_star - step
        if abs(x_new - xj) > h:  # Newton left the bracketing cell; keep seed
            break
        x_star = x_new
        if abs(step) < 1e-13:
            break
    m = float(interpolate_spectrum(grid, uhat, x_star))
    if m < v0:  # interpolation never drops below the best grid sample
        m, x_star = v0, xj
    return m, float(np.remainder(x_star, 2.0 * np.pi))


def extract_phase(traj: Trajectory, L: float,
                  flat_tol: float = DEFAULT_FLAT_TOL) -> PhaseTrack:
    """Unwrapped argmax phase c(t) = -x_max(t) (mod L) along a trajectory.

    Requires every sampled field to be inhomogeneous and the sampling dense
    enough that the raw phase moves less than L/4 between samples.
    """
    S = len(traj)
    raw = np.empty(S)
    mvals = np.empty(S)
    phixx = np.empty(S)
    for i in range(S):
        u = traj.field(i)
        if is_homogeneous(u, flat_tol):
            raise FlatField(float(traj.times[i]))
        m, xm = max_value(u, flat_tol)
        mvals[i] = m
        raw[i] = np.remainder(-xm, L)
        phixx[i] = interpolate_spectrum(traj.grid, u.spectrum(), xm, deriv=2)
    c = np.empty(S)
    c[0] = raw[0]
    for i in range(1, S):
        delta = np.remainder(raw[i] - raw[i - 1] + 0.5 * L, L) - 0.5 * L
        if abs(delta) >= 0.25 * L:
            raise UnwrapFailure(float(traj.times[i]), float(delta))
        c[i] = c[i - 1] + delta
    cdot = np.full(S, np.nan)
    if S >= 3:
        cdot[1:-1] = (c[2:] - c[:-2]) / (traj.times[2:] - traj.times[:-2])
    return PhaseTrack(times=traj.times.copy(), c=c, cdot=cdot, L=L,
                      max_values=mvals, phixx_at_max=phixx)


def reduced_rhs(traj: Trajectory, t: float, z: float, nl: Nonlinearity,
                eps_g_rel: float = DEFAULT_EPS_G_REL) -> float:
    """Right-hand side G(t, z) of the reduced phase equation.

    All spatial derivatives come from trigonometric differentiation and
    interpolation at x = -z.  Raises NearSingular when |u_xx(t,-z)| falls
    under eps_g_rel * sup|u| (the peak nondegeneracy fails numerically).
    """
    i = traj.index_of_time(t)
    u = traj.field(i)
    uhat = u.spectrum()
    x = -z
    phi = interpolate_spectrum(traj.grid, uhat, x)
    phix = interpolate_spectrum(traj.grid, uhat, x, deriv=1)
    phixx = interpolate_spectrum(traj.grid, uhat, x, deriv=2)
    phixxx = interpolate_spectrum(traj.grid, uhat, x, deriv=3)
    eps_g = eps_g_rel * u.sup_norm
    if abs(phixx) < eps_g:
        raise NearSingular(t, phixx, eps_g)
    _, f_u, f_p = nl_eval(nl, t + traj.forcing.offset, phi, phix)
    return float(f_p + (phixxx + f_u * phix) / phixx)


def verify_reduction(traj: Trajectory, track: PhaseTrack, nl: Nonlinearity,
                     eps_g_rel: float = DEFAULT_EPS_G_REL,
                     hull_eps: float = 0.02, max_pairs: int = 200,
                     seed: int = 0) -> ReductionReport:
    """Consistency of the circle-flow embedding along one trajectory.

    (a) ODE residual |cdot(t) - G(t, c(t))| at interior samples; residuals
    more than ten times the median are flagged.  (b) Fiber consistency: for
    sample pairs whose hull points are within hull_eps, the orbit distance of
    the fields (small values evidence a well-defined state over each base
    point).
    """
    S = len(traj)
    residuals = np.full(S, np.nan)
    for i in range(1, S - 1):
        if not np.isfinite(track.cdot[i]):
            continue
        try:
            g_val = reduced_rhs(traj, float(traj.times[i]), float(track.c[i]),
                                nl, eps_g_rel)
        except NearSingular:
            continue
        residuals[i] = abs(track.cdot[i] - g_val)
    valid = residuals[np.isfinite(residuals)]
    res_max = float(np.max(valid)) if valid.size else np.nan
    flagged = ()
    if valid.size:
        med = float(np.median(valid))
        floor = max(10.0 * med, 1e-14)
        flagged = tuple(float(traj.times[i]) for i in range(S)
                        if np.isfinite(residuals[i]) and residuals[i] > floor)

    rng = np.random.default_rng(seed)
    pairs = []
    orbit_max = 0.0
    if S >= 3:
        n_draw = min(max_pairs, S * (S - 1) // 2)
        for _ in range(n_draw):
            i, j = sorted(rng.choice(S, size=2, replace=False).tolist())
            hd = hull_distance(traj.hull_point(i), traj.hull_point(j))
            if hd < hull_eps:
                od = orbit_distance(traj.field(i), traj.field(j)).distance
                pairs.append((float(traj.times[i]), float(traj.times[j]), hd, od))
                orbit_max = max(orbit_max, od)
    return ReductionReport(times=traj.times.copy(), residuals=residuals,
                           ode_residual_max=res_max, flagged_times=flagged,
                           fiber_pairs=tuple(pairs), fiber_orbit_max=orbit_max)


def almost_period_scan(values: np.ndarray, dt_sample: float, eps: float,
                       max_period: float) -> AlmostPeriodReport:
    """Bohr-style scan: tau is accepted when sup over the overlap window of
    |x(t + tau) - x(t)| stays within eps.

    Reports the accepted tau grid and the largest gap between consecutive
    accepted values (tau = 0 included): bounded gaps are relative-density
    evidence, never a proof of almost periodicity.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 16:
        raise InsufficientData("almost-period scan needs at least 16 samples")
    j_max = min(int(np.floor(max_period / dt_sample)), n - max(8, n // 8))
    if j_max < 1:
        raise InsufficientData("series too short for the requested max_period")
    accepted = []
    for j in range(1, j_max + 1):
        if float(np.max(np.abs(x[j:] - x[:-j]))) <= eps:
            accepted.append(j * dt_sample)
    taus = np.array(accepted)
    if taus.size:
        gaps = np.diff(np.concatenate([[0.0], taus]))
        max_gap = float(np.max(gaps))
    else:
        max_gap = np.inf
    return AlmostPeriodReport(accepted=taus, max_gap=max_gap, eps=eps,
                              tau_spacing=dt_sample,
                              max_period=j_max * dt_sample)

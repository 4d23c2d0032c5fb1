"""Fourier collocation on the circle and exponential time stepping.

The solver advances u_t = u_xx + f(t, u, u_x) with the diffusion semigroup
applied exactly in Fourier space and the reaction term handled by the
fourth-order exponential Runge-Kutta stage rule of Cox & Matthews, with the
phi-function coefficients evaluated by the Kassam-Trefethen contour trick
(stable through the removable singularity of the zero mode).

References:

  1. Cox, S.M. and Matthews, P.C., Exponential time differencing for stiff
     systems, J. Comput. Phys. 176 (2002) 430-455.
  2. Kassam, A.-K. and Trefethen, L.N., Fourth-order time-stepping for stiff
     PDEs, SIAM J. Sci. Comput. 26 (2005) 1214-1233.

The reaction term is evaluated term by term: the constant, linear and
advection parts (D, B u, A u_x) act diagonally on the spectrum, while the
genuinely nonlinear products (C u^3, E u u_x) are formed in physical space on
a 3/2-padded grid and truncated back.  Besides removing aliasing, this keeps
linearly-invariant mode subspaces invariant to the last bit, which matters
for long runs near states whose uniform mode is strongly unstable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import Blowup, MismatchedTrajectories, NonFinite
from .forcing import HullPoint, Nonlinearity, eval_signal

DEFAULT_CEILING = 1.0e8
_CONTOUR_POINTS = 32


class CircleGrid:
    """Uniform grid x_i = 2 pi i / n on the circle, n a power of two >= 16."""

    def __init__(self, n_points: int):
        n = int(n_points)
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 16, got {n}")
        self.n = n
        self.spacing = 2.0 * np.pi / n
        self.x = self.spacing * np.arange(n)
        self.k = np.arange(n // 2 + 1, dtype=float)
        # Nyquist zeroed for odd derivatives (real-even convention).
        ik = 1j * self.k
        ik[-1] = 0.0
        self.ik = ik
        self.k2 = self.k ** 2
        self.n_pad = 3 * n // 2

    def __eq__(self, other):
        return isinstance(other, CircleGrid) and other.n == self.n

    def __hash__(self):
        return hash(("CircleGrid", self.n))

    def __repr__(self):
        return f"CircleGrid(n={self.n})"

    # -- spectral helpers ----------------------------------------------------

    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft(values)

    def to_physical(self, uhat: np.ndarray) -> np.ndarray:
        return np.fft.irfft(uhat, self.n)

    def pad_to_physical(self, uhat: np.ndarray) -> np.ndarray:
        """Physical values on the 3/2 grid; Nyquist bin dropped."""
        m = self.n_pad
        shape = uhat.shape[:-1] + (m // 2 + 1,)
        padded = np.zeros(shape, dtype=complex)
        padded[..., : self.n // 2] = uhat[..., : self.n // 2]
        return np.fft.irfft(padded, m) * (m / self.n)

    def truncate_from_physical(self, values_pad: np.ndarray) -> np.ndarray:
        """Spectrum of a padded-grid product, truncated below Nyquist."""
        m = self.n_pad
        full = np.fft.rfft(values_pad) * (self.n / m)
        shape = values_pad.shape[:-1] + (self.n // 2 + 1,)
        out = np.zeros(shape, dtype=complex)
        out[..., : self.n // 2] = full[..., : self.n // 2]
        return out

    def spectral_derivative(self, uhat: np.ndarray, order: int) -> np.ndarray:
        if order not in (1, 2, 3):
            raise ValueError("derivative order must be 1, 2 or 3")
        if order == 1:
            return self.ik * uhat
        if order == 2:
            return -self.k2 * uhat
        return self.ik * (-self.k2) * uhat


@dataclass(frozen=True)
class Field:
    """Real-valued function on the grid (state-space element).

    A field built from mode coefficients keeps its exact spectrum: the state
    is the trigonometric polynomial itself, so modes that are zero by
    construction stay exactly zero instead of picking up transform roundoff.
    That exactness is what lets the solver sit on invariant mode subspaces
    (e.g. zero-mean data of a diagonal equation) over long horizons.
    """

    grid: CircleGrid
    values: np.ndarray
    exact_spectrum: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.exact_spectrum is not None:
            s = np.asarray(self.exact_spectrum, dtype=complex).copy()
            if s.shape != (self.grid.n // 2 + 1,):
                raise ValueError("spectrum length does not match the grid")
            s.setflags(write=False)
            object.__setattr__(self, "exact_spectrum", s)

    @classmethod
    def from_spectrum(cls, grid: CircleGrid, uhat: np.ndarray) -> "Field":
        uhat = np.asarray(uhat, dtype=complex)
        return cls(grid, grid.to_physical(uhat), exact_spectrum=uhat)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def l2_norm(self) -> float:
        """Discrete L2 norm sqrt(integral of u^2 over the circle)."""
        return float(np.sqrt(self.grid.spacing * np.sum(self.values ** 2)))

    def spectrum(self) -> np.ndarray:
        if self.exact_spectrum is not None:
            return self.exact_spectrum
        return self.grid.to_spectral(self.values)

    def interpolate(self, x, deriv: int = 0):
        """Trigonometric interpolant (or its derivative) at arbitrary x."""
        return interpolate_spectrum(self.grid, self.spectrum(), x, deriv)


def interpolate_spectrum(grid: CircleGrid, uhat: np.ndarray, x, deriv: int = 0):
    """Evaluate sum_k c_k e^{ikx} (real form) at arbitrary points."""
    x = np.asarray(x, dtype=float)
    n = grid.n
    k = grid.k
    coeff = uhat.copy()
    if deriv:
        for _ in range(deriv):
            coeff = coeff * (1j * k)
        coeff[-1] = 0.0  # Nyquist dropped once differentiated
    kx = np.multiply.outer(x, k)
    cos_kx = np.cos(kx)
    sin_kx = np.sin(kx)
    re = coeff.real.copy()
    im = coeff.imag.copy()
    weights = np.full(n // 2 + 1, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    out = (cos_kx @ (weights * re) - sin_kx @ (weights * im)) / n
    return out if out.shape else float(out)


def derivative(u: Field, order: int) -> Field:
    """Trigonometric differentiation; exact for band-limited fields."""
    uhat = u.grid.spectral_derivative(u.spectrum(), order)
    return Field(u.grid, u.grid.to_physical(uhat))


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped solution samples with solver metadata.

    ``states`` holds one grid field per row; sample times increase and
    consecutive gaps are integer multiples of dt.
    """

    grid: CircleGrid
    forcing: HullPoint
    nonlinearity: Nonlinearity
    dt: float
    stride: int
    times: np.ndarray
    states: np.ndarray
    order: int = 4
    dealiased: bool = True
    ceiling: float = DEFAULT_CEILING

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=float)
        if s.shape != (t.size, self.grid.n):
            raise ValueError("states shape does not match times/grid")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def __len__(self):
        return self.times.size

    def field(self, i: int) -> Field:
        return Field(self.grid, self.states[i])

    def hull_point(self, i: int) -> HullPoint:
        return self.forcing.advance(float(self.times[i]))

    def index_of_time(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"t={t} is not a sample time")
        return i

    def compatible_with(self, other: "Trajectory") -> bool:
        return (self.grid == other.grid
                and self.dt == other.dt
                and self.stride == other.stride
                and self.forcing.same_family(other.forcing)
                and self.forcing.offset == other.forcing.offset
                and self.times.shape == other.times.shape
                and bool(np.all(self.times == other.times)))


class _ETDRK4:
    """Precomputed exponential-integrator tableau for L = -k^2 and fixed dt."""

    def __init__(self, grid: CircleGrid, dt: float):
        self.grid = grid
        self.dt = dt
        L = -grid.k2
        self.E = np.exp(dt * L)
        self.E2 = np.exp(0.5 * dt * L)
        # Contour quadrature around each dt*L for the phi functions.
        theta = np.exp(1j * np.pi * (np.arange(_CONTOUR_POINTS) + 0.5)
                       / _CONTOUR_POINTS)
        z = dt * L[:, None] + theta[None, :]
        ez = np.exp(z)
        self.Q = dt * ((np.exp(z / 2.0) - 1.0) / z).mean(1).real
        self.f1 = dt * ((-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z ** 3).mean(1).real
        self.f2 = dt * ((2.0 + z + ez * (z - 2.0)) / z ** 3).mean(1).real
        self.f3 = dt * ((-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z ** 3).mean(1).real


class _CoefficientTable:
    """Nonlinearity coefficients pre-evaluated at all stage times."""

    def __init__(self, nl: Nonlinearity, g: HullPoint, t0: float, dt: float,
                 n_steps: int):
        # Stage times are t, t + dt/2, t + dt; consecutive steps share nodes,
        # so the half grid t0 + j dt/2 (j = 0..2 n_steps) covers all of them.
        times = t0 + g.offset + 0.5 * dt * np.arange(2 * n_steps + 1)
        self.A = np.atleast_1d(eval_signal(nl.A, times))
        self.B = np.atleast_1d(eval_signal(nl.B, times))
        self.C = np.atleast_1d(eval_signal(nl.C, times))
        self.D = np.atleast_1d(eval_signal(nl.D, times))
        self.E = np.atleast_1d(eval_signal(nl.E, times))

    def at(self, j: int):
        return (self.A[j], self.B[j], self.C[j], self.D[j], self.E[j])


class Stepper:
    """One ETDRK4 step of the nonlinear flow, with stage states exposed.

    The same stage states drive the tangent propagation, so the linearized
    step below is the exact Jacobian of the nonlinear step.
    """

    def __init__(self, grid: CircleGrid, nl: Nonlinearity, g: HullPoint,
                 dt: float, n_steps: int, t0: float = 0.0, dealias: bool = True):
        self.grid = grid
        self.nl = nl
        self.tab = _ETDRK4(grid, dt)
        self.coeffs = _CoefficientTable(nl, g, t0, dt, n_steps)
        self.dealias = dealias
        self.products = nl.has_cubic or nl.has_advection_product

    # -- reaction term -------------------------------------------------------

    def _nhat(self, uhat: np.ndarray, j: int) -> np.ndarray:
        """Spectrum of f(t_j, u, u_x); j indexes the half-step time grid."""
        a, b, c, d, e = self.coeffs.at(j)
        g = self.grid
        out = b * uhat + a * (g.ik * uhat)
        if d != 0.0:
            out = out.copy()
            out[0] += d * g.n
        if self.products and (c != 0.0 or e != 0.0):
            if self.dealias:
                u = g.pad_to_physical(uhat)
                p = g.pad_to_physical(g.ik * uhat)
                out = out + g.truncate_from_physical(c * u ** 3 + e * u * p)
            else:
                u = g.to_physical(uhat)
                p = g.to_physical(g.ik * uhat)
                out = out + g.to_spectral(c * u ** 3 + e * u * p)
        return out

    def _jhat(self, uhat_base: np.ndarray, psihat: np.ndarray, j: int) -> np.ndarray:
        """Directional derivative of the reaction term at a base stage.

        J(u) psi = f_u(t,u,u_x) psi + f_p(t,u,u_x) psi_x with f_u, f_p exact;
        psihat may carry several tangent vectors in its leading axis.
        """
        a, b, c, e = (self.coeffs.A[j], self.coeffs.B[j],
                      self.coeffs.C[j], self.coeffs.E[j])
        g = self.grid
        out = b * psihat + a * (g.ik * psihat)
        if self.products and (c != 0.0 or e != 0.0):
            if self.dealias:
                u = g.pad_to_physical(uhat_base)
                p = g.pad_to_physical(g.ik * uhat_base)
                psi = g.pad_to_physical(psihat)
                psix = g.pad_to_physical(g.ik * psihat)
                prod = (3.0 * c * u ** 2 + e * p) * psi + (e * u) * psix
                out = out + g.truncate_from_physical(prod)
            else:
                u = g.to_physical(uhat_base)
                p = g.to_physical(g.ik * uhat_base)
                psi = g.to_physical(psihat)
                psix = g.to_physical(g.ik * psihat)
                prod = (3.0 * c * u ** 2 + e * p) * psi + (e * u) * psix
                out = out + g.to_spectral(prod)
        return out

    # -- stepping ------------------------------------------------------------

    def step(self, uhat: np.ndarray, i: int):
        """Advance step i -> i+1; returns (uhat_next, stage tuple)."""
        tab = self.tab
        j0, jh, j1 = 2 * i, 2 * i + 1, 2 * i + 2
        n0 = self._nhat(uhat, j0)
        ahat = tab.E2 * uhat + tab.Q * n0
        na = self._nhat(ahat, jh)
        bhat = tab.E2 * uhat + tab.Q * na
        nb = self._nhat(bhat, jh)
        chat = tab.E2 * ahat + tab.Q * (2.0 * nb - n0)
        nc = self._nhat(chat, j1)
        unew = (tab.E * uhat + tab.f1 * n0 + 2.0 * tab.f2 * (na + nb)
                + tab.f3 * nc)
        return unew, (uhat, ahat, bhat, chat)

    def tangent_step(self, stages, psihat: np.ndarray, i: int) -> np.ndarray:
        """Exact differential of ``step`` applied to tangent vectors."""
        tab = self.tab
        j0, jh, j1 = 2 * i, 2 * i + 1, 2 * i + 2
        uhat, ahat, bhat, chat = stages
        m0 = self._jhat(uhat, psihat, j0)
        da = tab.E2 * psihat + tab.Q * m0
        ma = self._jhat(ahat, da, jh)
        db = tab.E2 * psihat + tab.Q * ma
        mb = self._jhat(bhat, db, jh)
        dc = tab.E2 * da + tab.Q * (2.0 * mb - m0)
        mc = self._jhat(chat, dc, j1)
        return (tab.E * psihat + tab.f1 * m0 + 2.0 * tab.f2 * (ma + mb)
                + tab.f3 * mc)


def _resolve_steps(t_end: float, dt: float) -> int:
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    n_steps = int(round(t_end / dt))
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError(f"t_end={t_end} is not an integer number of steps of dt={dt}")
    return n_steps


def evolve(u0: Field, g: HullPoint, nl: Nonlinearity, t_end: float, dt: float,
           stride: int = 1, ceiling: float = DEFAULT_CEILING,
           dealias: bool = True) -> Trajectory:
    """Integrate u_t = u_xx + g(t, u, u_x) from u0 over [0, t_end].

    Samples are recorded every ``stride`` steps (plus the final step).
    Raises Blowup when the sup norm exceeds ``ceiling`` and NonFinite on
    overflow; identical inputs produce bit-identical trajectories.
    """
    grid = u0.grid
    n_steps = _resolve_steps(t_end, dt)
    stride = int(stride)
    if stride < 1:
        raise ValueError("stride must be a positive integer")
    stepper = Stepper(grid, nl, g, dt, n_steps, dealias=dealias)

    uhat = u0.spectrum().astype(complex)
    times = [0.0]
    states = [u0.values.copy()]
    # |c_k| <= n * sup|u|, so this spectral guard can only fire past the ceiling.
    spectral_guard = ceiling * grid.n
    for i in range(n_steps):
        uhat, _ = stepper.step(uhat, i)
        t = (i + 1) * dt
        if not np.all(np.isfinite(uhat)):
            raise NonFinite(t)
        if np.max(np.abs(uhat)) > spectral_guard:
            raise Blowup(t, np.max(np.abs(grid.to_physical(uhat))))
        if (i + 1) % stride == 0 or (i + 1) == n_steps:
            u = grid.to_physical(uhat)
            sup = float(np.max(np.abs(u)))
            if sup > ceiling:
                raise Blowup(t, sup)
            times.append(t)
            states.append(u)
    return Trajectory(grid=grid, forcing=g, nonlinearity=nl, dt=dt,
                      stride=stride, times=np.array(times),
                      states=np.array(states), dealiased=dealias,
                      ceiling=ceiling)


def evolve_linearized(base: Trajectory, psi0: Field) -> Trajectory:
    """Propagate the variational equation along a stride-1 base trajectory.

    psi_t = psi_xx + f_p(t, u, u_x) psi_x + f_u(t, u, u_x) psi with the
    coefficients frozen per stage from the base states, i.e. the exact
    Jacobian of the nonlinear stepping.
    """
    if base.stride != 1:
        raise MismatchedTrajectories("linearized propagation needs a stride-1 base")
    if psi0.grid != base.grid:
        raise MismatchedTrajectories("tangent field lives on a different grid")
    grid = base.grid
    n_steps = len(base) - 1
    stepper = Stepper(grid, base.nonlinearity, base.forcing, base.dt, n_steps,
                      t0=float(base.times[0]), dealias=base.dealiased)
    psihat = psi0.spectrum().astype(complex)
    states = [psi0.values.copy()]
    for i in range(n_steps):
        uhat = grid.to_spectral(base.states[i])
        _, stages = stepper.step(uhat, i)
        psihat = stepper.tangent_step(stages, psihat, i)
        if not np.all(np.isfinite(psihat)):
            raise NonFinite(float(base.times[i + 1]))
        states.append(grid.to_physical(psihat))
    return Trajectory(grid=grid, forcing=base.forcing,
                      nonlinearity=base.nonlinearity, dt=base.dt, stride=1,
                      times=base.times.copy(), states=np.array(states),
                      dealiased=base.dealiased, ceiling=base.ceiling)


def shift_values(values: np.ndarray, cells: int) -> np.ndarray:
    """Exact grid rotation (sigma_a u)(x) = u(x + a) for a = cells * spacing."""
    return np.roll(values, -cells)

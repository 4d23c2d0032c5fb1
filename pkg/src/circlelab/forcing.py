"""Recurrent time forcing, hull points, and the parametric nonlinearity.

A signal is a finite trigonometric sum  c + sum_k a_k sin(w_k t + theta_k),
optionally augmented by the built-in dyadic series

    -sum_{k>=1} 2^{-k} pi sin(2^{-k} pi t),

whose geometric amplitude decay gives explicit truncation tails
(|tail| <= 2^{-K} pi after K terms).  Time translates of one signal stand in
for points of its hull; a translate is represented exactly by a real offset,
so translated evaluation is evaluation at shifted time to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Built-in dyadic series depths: fixed for point values, adaptive for integrals.
APPENDIX_EVAL_DEPTH = 60
APPENDIX_INTEGRAL_EXTRA_DEPTH = 30

# Sample spacing for the windowed sup in hull_distance.  The sup is taken over
# a fixed finite sample set, so the metric axioms hold exactly.
HULL_SAMPLE_SPACING = 0.125
HULL_DEFAULT_WINDOW = 16.0
HULL_DEFAULT_DEPTH = 8


def _dyadic_frequencies(depth: int) -> np.ndarray:
    ks = np.arange(1, depth + 1)
    return np.pi * np.power(2.0, -ks)


@dataclass(frozen=True)
class QuasiPeriodicSignal:
    """Trigonometric sum with optional constant term and dyadic tail.

    modes: array of shape (M, 3) holding (amplitude, frequency, phase) rows;
    frequencies must be strictly positive.  When ``adaptive`` is set the
    built-in dyadic series is added on top, truncated at ``truncation_count``
    terms for point values and at an adaptive depth for integrals.
    """

    modes: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    constant: float = 0.0
    adaptive: bool = False
    truncation_count: int = APPENDIX_EVAL_DEPTH

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=float).reshape(-1, 3)
        if modes.size and not np.all(np.isfinite(modes)):
            raise ValueError("signal modes must be finite")
        if modes.size and np.any(modes[:, 1] <= 0.0):
            raise ValueError("signal frequencies must be strictly positive")
        if self.truncation_count < 1:
            raise ValueError("truncation_count must be positive")
        modes.setflags(write=False)
        object.__setattr__(self, "modes", modes)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t):
        return eval_signal(self, t)

    @property
    def is_constant(self) -> bool:
        return not self.adaptive and self.modes.shape[0] == 0

    def bound(self) -> float:
        """Upper bound for sup |signal| (amplitude sum plus dyadic tail)."""
        b = abs(self.constant) + float(np.abs(self.modes[:, 0]).sum())
        if self.adaptive:
            b += math.pi  # sum 2^-k pi over k>=1
        return b


def appendix_series(truncation_count: int = APPENDIX_EVAL_DEPTH) -> QuasiPeriodicSignal:
    """The built-in dyadic almost-periodic forcing."""
    return QuasiPeriodicSignal(adaptive=True, truncation_count=truncation_count)


def constant_signal(value: float) -> QuasiPeriodicSignal:
    return QuasiPeriodicSignal(constant=float(value))


def eval_signal(sig: QuasiPeriodicSignal, t):
    """Evaluate the signal at time(s) t.

    For the dyadic series the fixed depth keeps the tail below 1e-14
    (2^-60 pi ~ 2.7e-18).
    """
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, sig.constant, dtype=float)
    if sig.modes.shape[0]:
        a = sig.modes[:, 0]
        w = sig.modes[:, 1]
        th = sig.modes[:, 2]
        out = out + np.sin(np.multiply.outer(t, w) + th) @ a
    if sig.adaptive:
        w = _dyadic_frequencies(sig.truncation_count)
        out = out - np.sin(np.multiply.outer(t, w)) @ w
    return out if out.shape else float(out)


def integral_signal(sig: QuasiPeriodicSignal, t):
    """Integral of the signal from 0 to t, per-mode closed form.

    Each mode contributes (a/w)(cos theta - cos(w t + theta)).  The dyadic
    part uses depth ceil(log2(max(|t|,2))) + 30, which keeps the quadratic
    tail bound (pi^2 t^2 / 6) 4^{-K} below 1e-12 for any finite t.
    """
    t = np.asarray(t, dtype=float)
    out = sig.constant * t
    if sig.modes.shape[0]:
        a = sig.modes[:, 0]
        w = sig.modes[:, 1]
        th = sig.modes[:, 2]
        out = out + (np.cos(th) - np.cos(np.multiply.outer(t, w) + th)) @ (a / w)
    if sig.adaptive:
        tmax = float(np.max(np.abs(t))) if t.size else 0.0
        depth = int(math.ceil(math.log2(max(tmax, 2.0)))) + APPENDIX_INTEGRAL_EXTRA_DEPTH
        w = _dyadic_frequencies(depth)
        # integral of -w sin(w s) is cos(w t) - 1
        out = out + (np.cos(np.multiply.outer(t, w)) - 1.0).sum(axis=-1)
    return out if out.shape else float(out)


def translate_signal(sig: QuasiPeriodicSignal, tau: float) -> QuasiPeriodicSignal:
    """Time translate as an explicit phase shift theta_k -> theta_k + w_k tau.

    An adaptive signal is materialized at its truncation depth first; the
    truncated dyadic sum is 2^(K+1)-periodic, so translating by that period
    reproduces the original pointwise.  Hull points represent translates
    without materializing (exactly, via offset arithmetic).
    """
    tau = float(tau)
    modes = np.array(sig.modes, dtype=float).reshape(-1, 3)
    if sig.adaptive:
        w = _dyadic_frequencies(sig.truncation_count)
        dyadic = np.column_stack([-w, w, np.zeros_like(w)])
        modes = np.vstack([modes, dyadic]) if modes.size else dyadic
    if modes.size:
        modes = modes.copy()
        modes[:, 2] = np.remainder(modes[:, 2] + modes[:, 1] * tau, 2.0 * np.pi)
    return QuasiPeriodicSignal(modes=modes, constant=sig.constant,
                               truncation_count=sig.truncation_count)


@dataclass(frozen=True)
class HullPoint:
    """A time translate of a generating signal: g = base . offset."""

    base: QuasiPeriodicSignal
    offset: float = 0.0

    def advance(self, t: float) -> "HullPoint":
        """The hull flow g . t."""
        return HullPoint(self.base, self.offset + t)

    def __call__(self, t):
        return eval_signal(self.base, np.asarray(t, dtype=float) + self.offset)

    def integral(self, t):
        """Integral of the translated signal from 0 to t."""
        return (integral_signal(self.base, np.asarray(t, dtype=float) + self.offset)
                - integral_signal(self.base, self.offset))

    def same_family(self, other: "HullPoint") -> bool:
        return self.base is other.base or self.base == other.base


def hull_window_offsets(window: float = HULL_DEFAULT_WINDOW,
                        depth: int = HULL_DEFAULT_DEPTH) -> list[np.ndarray]:
    """Sample offsets for each nested window of the hull metric."""
    out = []
    for j in range(1, depth + 1):
        w = j * window / depth
        m = max(1, int(round(w / HULL_SAMPLE_SPACING)))
        out.append(np.arange(-m, m + 1) * HULL_SAMPLE_SPACING)
    return out


def hull_distance(g1: HullPoint, g2: HullPoint,
                  window: float = HULL_DEFAULT_WINDOW,
                  depth: int = HULL_DEFAULT_DEPTH) -> float:
    """Weighted-window sup metric surrogate for the compact-open topology.

    sum_{j=1..depth} 2^{-j} min(1, sup_{|t| <= j window/depth} |g1 - g2|),
    with each sup taken over a fixed sample grid (spacing 1/8).
    """
    if not g1.same_family(g2):
        raise ValueError("hull points must reference the same signal family")
    total = 0.0
    for j, offs in enumerate(hull_window_offsets(window, depth), start=1):
        sup = float(np.max(np.abs(g1(offs) - g2(offs))))
        total += 2.0 ** (-j) * min(1.0, sup)
    return total


@dataclass(frozen=True)
class Nonlinearity:
    """Parametric reaction term f(t,u,p) = D + B u + C u^3 + A p + E u p.

    The partials f_u = B + 3 C u^2 + E p and f_p = A + E u are exact, which is
    what the linearized solver and the reduced circle-flow rely on.
    """

    A: QuasiPeriodicSignal = field(default_factory=lambda: constant_signal(0.0))
    B: QuasiPeriodicSignal = field(default_factory=lambda: constant_signal(0.0))
    C: QuasiPeriodicSignal = field(default_factory=lambda: constant_signal(0.0))
    D: QuasiPeriodicSignal = field(default_factory=lambda: constant_signal(0.0))
    E: QuasiPeriodicSignal = field(default_factory=lambda: constant_signal(0.0))

    def coefficients_at(self, t: float, offset: float = 0.0):
        """Scalar coefficient values at shifted time t + offset."""
        s = t + offset
        return (eval_signal(self.A, s), eval_signal(self.B, s),
                eval_signal(self.C, s), eval_signal(self.D, s),
                eval_signal(self.E, s))

    @property
    def has_cubic(self) -> bool:
        return not (self.C.is_constant and self.C.constant == 0.0)

    @property
    def has_advection_product(self) -> bool:
        return not (self.E.is_constant and self.E.constant == 0.0)


def nl_eval(nl: Nonlinearity, t, u, p):
    """Value and exact partials (f, f_u, f_p) of the parametric form."""
    a, b, c, d, e = nl.coefficients_at(t)
    f = d + b * u + c * u ** 3 + a * p + e * u * p
    f_u = b + 3.0 * c * u ** 2 + e * p
    f_p = a + e * u
    return f, f_u, f_p


def appendix_nonlinearity() -> Nonlinearity:
    """f(t,u,p) = p + (f0(t) + 1) u with the built-in dyadic f0."""
    return Nonlinearity(
        A=constant_signal(1.0),
        B=QuasiPeriodicSignal(adaptive=True, constant=1.0),
    )

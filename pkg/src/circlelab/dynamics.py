"""Finite-horizon surrogates for omega-limit sets and their diagnostics.

An omega sample is the post-transient tail of one bounded trajectory,
recorded as (t, state, hull point) triples and clustered in the quotient
metric (orbit distance plus hull distance).  Everything downstream is finite
evidence at stated resolutions: return-time statistics for minimality,
per-base-bin multiplicities for the 1-cover question, forward proximality
scans, and homogeneity classification.  Backward-time diagnostics are
excluded throughout (the parabolic problem is ill-posed backward).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData
from .forcing import (HULL_DEFAULT_DEPTH, HULL_DEFAULT_WINDOW,
                      HULL_SAMPLE_SPACING, HullPoint, Nonlinearity,
                      eval_signal, hull_window_offsets)
from .spectral import DEFAULT_CEILING, Field, Trajectory, evolve
from .symmetry import is_homogeneous, orbit_distance
from .zeros import DEFAULT_REL_TOL, zero_number
from .errors import DegenerateField

HOMOGENEOUS = "HOMOGENEOUS"
INHOMOGENEOUS = "INHOMOGENEOUS"
MIXED = "MIXED"

DEFAULT_TRANSIENT_FRACTION = 0.2
MIN_SNAPSHOTS = 100


class _HullCache:
    """Windowed-sup hull distances between many translates of one signal.

    Pre-evaluates the signal on a master grid aligned with the metric's
    sample spacing; reproduces forcing.hull_distance up to roundoff when the
    offsets are multiples of the spacing, and falls back to broadcast
    evaluation otherwise.
    """

    def __init__(self, base, offsets: np.ndarray,
                 window: float = HULL_DEFAULT_WINDOW,
                 depth: int = HULL_DEFAULT_DEPTH):
        self.offsets = np.asarray(offsets, dtype=float)
        self.window = window
        self.depth = depth
        self.window_offsets = hull_window_offsets(window, depth)
        delta = HULL_SAMPLE_SPACING
        rel = (self.offsets - self.offsets.min()) / delta
        self.aligned = bool(np.max(np.abs(rel - np.round(rel))) < 1e-9)
        self.base = base
        if self.aligned:
            t0 = self.offsets.min() - window - delta
            t1 = self.offsets.max() + window + delta
            m = int(np.ceil((t1 - t0) / delta)) + 1
            self.t0 = t0
            self.values = np.atleast_1d(eval_signal(base, t0 + delta * np.arange(m)))
            self.pos = np.round((self.offsets - t0) / delta).astype(int)
            self.wo_idx = [np.round(offs / delta).astype(int)
                           for offs in self.window_offsets]

    def dist_many(self, i: int, js: np.ndarray) -> np.ndarray:
        js = np.asarray(js, dtype=int)
        if js.size == 0:
            return np.zeros(0)
        if self.aligned:
            out = np.zeros(js.size)
            vi = self.values
            pi = self.pos[i]
            pj = self.pos[js]
            for level, idx in enumerate(self.wo_idx, start=1):
                sup = np.max(np.abs(vi[pi + idx][None, :] - vi[pj[:, None] + idx]),
                             axis=1)
                out += 2.0 ** (-level) * np.minimum(1.0, sup)
            return out
        out = np.zeros(js.size)
        for level, offs in enumerate(self.window_offsets, start=1):
            fi = np.atleast_1d(eval_signal(self.base, self.offsets[i] + offs))
            fj = np.atleast_1d(eval_signal(
                self.base, self.offsets[js][:, None] + offs[None, :]))
            sup = np.max(np.abs(fi[None, :] - fj), axis=1)
            out += 2.0 ** (-level) * np.minimum(1.0, sup)
        return out

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_many(i, np.array([j]))[0])


@dataclass(frozen=True)
class OmegaSample:
    """Post-transient snapshot library of one trajectory."""

    grid: object
    base_signal: object
    nonlinearity: Nonlinearity
    times: np.ndarray
    states: np.ndarray
    offsets: np.ndarray          # hull offset tau per snapshot
    transient: float
    horizon: float
    cluster_labels: np.ndarray
    cluster_eps: float
    homog_flags: np.ndarray
    homog_tol: float
    zcounts: np.ndarray          # -1 where the count is degenerate
    zambiguous: np.ndarray
    hull_window: float = HULL_DEFAULT_WINDOW
    hull_depth: int = HULL_DEFAULT_DEPTH

    def __len__(self):
        return self.times.size

    def field(self, i: int) -> Field:
        return Field(self.grid, self.states[i])

    def hull_point(self, i: int) -> HullPoint:
        return HullPoint(self.base_signal, float(self.offsets[i]))

    def sup_norms(self) -> np.ndarray:
        return np.max(np.abs(self.states), axis=1)

    def rms_norms(self) -> np.ndarray:
        """Root-mean-square per snapshot; exactly rotation-invariant, so
        |rms_i - rms_j| lower-bounds the sup orbit distance (used to prune)."""
        return np.sqrt(np.mean(self.states ** 2, axis=1))

    def hull_cache(self) -> _HullCache:
        return _HullCache(self.base_signal, self.offsets,
                          self.hull_window, self.hull_depth)


@dataclass(frozen=True)
class FiberReport:
    base_bins: tuple             # (center offset, multiplicity, bin size)
    max_multiplicity: int
    singleton_fraction: float
    hull_eps: float
    orbit_eps: float


@dataclass(frozen=True)
class RecurrenceReport:
    eps: float
    window: float
    eligible: int
    returned: int
    minimal_like: bool
    max_gap: float               # inf when some state never returned
    median_gap: float
    min_gap: float
    per_cluster: dict


@dataclass(frozen=True)
class ProximalityReport:
    forward_proximal: bool
    min_distance: float
    first_hit_offset: float | None
    scanned: int


def _quotient_dist(sample: OmegaSample, cache: _HullCache, i: int, j: int) -> float:
    od = orbit_distance(sample.field(i), sample.field(j)).distance
    return od + cache.dist(i, j)


def _leader_cluster(rms, cache, orbit_dist, eps):
    """Greedy leader clustering in the quotient metric.

    Quotient distance dominates the hull distance, and the sup orbit distance
    dominates the gap of rotation-invariant rms norms, so candidates are
    pruned with those two cheap bounds before any orbit scan.  Snapshots are
    visited in time order, which makes labels reproducible.
    """
    leaders: list[int] = []
    labels = np.empty(rms.size, dtype=int)
    for i in range(rms.size):
        assigned = -1
        if leaders:
            arr = np.asarray(leaders)
            hull_d = cache.dist_many(i, arr)
            gap = np.maximum(np.abs(rms[i] - rms[arr]) - 1e-12, 0.0)
            cand = np.flatnonzero(hull_d + gap < eps)
            for ci in cand:
                if orbit_dist(i, int(arr[ci])) + hull_d[ci] < eps:
                    assigned = int(ci)
                    break
        if assigned < 0:
            leaders.append(i)
            assigned = len(leaders) - 1
        labels[i] = assigned
    return labels, leaders


def sample_omega(u0: Field, g: HullPoint, nl: Nonlinearity, transient: float,
                 horizon: float, stride: int, dt: float,
                 cluster_eps: float | None = None,
                 homog_tol: float = 1e-6,
                 zero_tol_rel: float = DEFAULT_REL_TOL,
                 ceiling: float = DEFAULT_CEILING,
                 hull_window: float = HULL_DEFAULT_WINDOW,
                 hull_depth: int = HULL_DEFAULT_DEPTH) -> OmegaSample:
    """Collect the post-transient tail of one run as an omega-set surrogate.

    Snapshots on (transient, horizon] are clustered by quotient distance at
    threshold cluster_eps (default 1e-3 times the median snapshot norm);
    homogeneity flags and zero counts against the zero reference state are
    recorded per snapshot.
    """
    if not transient < horizon:
        raise ValueError("transient must be smaller than horizon")
    traj = evolve(u0, g, nl, horizon, dt, stride=stride, ceiling=ceiling)
    keep = traj.times > transient
    times = traj.times[keep]
    states = traj.states[keep]
    offsets = g.offset + times

    norms = np.max(np.abs(states), axis=1)
    if cluster_eps is None:
        cluster_eps = 1e-3 * float(np.median(norms))
    cache = _HullCache(g.base, offsets, hull_window, hull_depth)

    grid = traj.grid

    def orbit_dist(i, j):
        return orbit_distance(Field(grid, states[i]), Field(grid, states[j])).distance

    labels, _ = _leader_cluster(norms, cache, orbit_dist, cluster_eps)

    homog = np.array([is_homogeneous(Field(grid, s), homog_tol) for s in states])
    zc = np.full(times.size, -1, dtype=int)
    zamb = np.zeros(times.size, dtype=bool)
    for i, s in enumerate(states):
        try:
            res = zero_number(Field(grid, s), zero_tol_rel * float(norms[i]))
        except DegenerateField:
            continue
        zc[i] = res.count
        zamb[i] = res.ambiguous
    return OmegaSample(grid=grid, base_signal=g.base, nonlinearity=nl,
                       times=times, states=states, offsets=offsets,
                       transient=transient, horizon=horizon,
                       cluster_labels=labels, cluster_eps=float(cluster_eps),
                       homog_flags=homog, homog_tol=homog_tol,
                       zcounts=zc, zambiguous=zamb,
                       hull_window=hull_window, hull_depth=hull_depth)


def recurrence_diagnostic(s: OmegaSample, eps: float,
                          window: float | None = None) -> RecurrenceReport:
    """Return-time statistics of eps-returns in the quotient metric.

    A MINIMAL-LIKE verdict means every snapshot with at least ``window`` of
    future horizon found an eps-return within that window (bounded-gap,
    relative-density evidence only).
    """
    n = len(s)
    if n < MIN_SNAPSHOTS:
        raise InsufficientData(f"need >= {MIN_SNAPSHOTS} snapshots, have {n}")
    span = float(s.times[-1] - s.times[0])
    if window is None:
        window = span / 4.0
    cache = s.hull_cache()
    norms = s.sup_norms()
    gaps = []
    per_cluster: dict[int, list] = {}
    eligible = 0
    returned = 0
    all_returned = True
    for i in range(n):
        if s.times[i] > s.times[-1] - window:
            break
        eligible += 1
        js = np.arange(i + 1, n)
        js = js[s.times[js] - s.times[i] <= window]
        hd = cache.dist_many(i, js)
        cand = js[(hd < eps) & (np.abs(norms[js] - norms[i]) + hd < eps)]
        gap = None
        for j in cand:
            d = orbit_distance(s.field(i), s.field(int(j))).distance + cache.dist(i, int(j))
            if d < eps:
                gap = float(s.times[int(j)] - s.times[i])
                break
        if gap is None:
            all_returned = False
            continue
        returned += 1
        gaps.append(gap)
        per_cluster.setdefault(int(s.cluster_labels[i]), []).append(gap)
    if eligible == 0:
        raise InsufficientData("window leaves no snapshot with scannable future")
    stats = {k: (min(v), float(np.median(v)), max(v)) for k, v in per_cluster.items()}
    return RecurrenceReport(
        eps=eps, window=window, eligible=eligible, returned=returned,
        minimal_like=all_returned,
        max_gap=(max(gaps) if all_returned and gaps else np.inf),
        median_gap=(float(np.median(gaps)) if gaps else np.inf),
        min_gap=(min(gaps) if gaps else np.inf),
        per_cluster=stats)


def fiber_multiplicity(s: OmegaSample, hull_eps: float | None = None,
                       orbit_eps: float | None = None,
                       quantile_pairs: int = 500, seed: int = 0) -> FiberReport:
    """Bin snapshots by hull closeness and count quotient classes per bin.

    max_multiplicity >= 2 with singleton_fraction < 1 is almost-1-cover
    evidence at the stated resolutions: several distinct states sit over
    nearly the same base point.
    """
    n = len(s)
    if n < MIN_SNAPSHOTS:
        raise InsufficientData(f"need >= {MIN_SNAPSHOTS} snapshots, have {n}")
    cache = s.hull_cache()
    norms = s.sup_norms()
    if hull_eps is None:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, n, size=quantile_pairs)
        jj = rng.integers(0, n, size=quantile_pairs)
        mask = ii != jj
        d = np.array([cache.dist(int(a), int(b))
                      for a, b in zip(ii[mask], jj[mask])])
        # Floor keeps coincident hull points (constant forcing) in one bin.
        hull_eps = max(float(np.quantile(d, 0.05)), 1e-9)
    if orbit_eps is None:
        orbit_eps = 1e-3 * float(np.median(norms))

    # Leader binning in the hull metric.
    bin_leaders: list[int] = []
    bin_members: list[list[int]] = []
    for i in range(n):
        placed = False
        if bin_leaders:
            d = cache.dist_many(i, np.array(bin_leaders))
            hit = np.flatnonzero(d < hull_eps)
            if hit.size:
                bin_members[int(hit[0])].append(i)
                placed = True
        if not placed:
            bin_leaders.append(i)
            bin_members.append([i])

    bins = []
    for leader, members in zip(bin_leaders, bin_members):
        reps: list[int] = []
        for i in members:
            hit = False
            for r in reps:
                if abs(norms[i] - norms[r]) > orbit_eps:
                    continue
                if orbit_distance(s.field(i), s.field(r)).distance < orbit_eps:
                    hit = True
                    break
            if not hit:
                reps.append(i)
        bins.append((float(s.offsets[leader]), len(reps), len(members)))
    mult = np.array([b[1] for b in bins])
    return FiberReport(base_bins=tuple(bins),
                       max_multiplicity=int(np.max(mult)),
                       singleton_fraction=float(np.mean(mult == 1)),
                       hull_eps=float(hull_eps), orbit_eps=float(orbit_eps))


def proximality(s: OmegaSample, i: int, j: int, eps: float,
                max_scan: int | None = None) -> ProximalityReport:
    """Scan forward along both snapshot orbits for a quotient eps-approach.

    Both snapshots belong to one sampled trajectory, so their forward orbit
    segments are the later snapshots at matching time offsets.  Forward
    proximality only; backward scans are excluded by design.
    """
    n = len(s)
    k_max = min(n - 1 - i, n - 1 - j)
    if max_scan is not None:
        k_max = min(k_max, max_scan)
    if k_max < 1:
        raise InsufficientData("snapshots have no common forward horizon")
    cache = s.hull_cache()
    best = np.inf
    first_hit = None
    for k in range(k_max + 1):
        d = _quotient_dist(s, cache, i + k, j + k)
        if d < best:
            best = d
        if d < eps and first_hit is None:
            first_hit = float(s.times[i + k] - s.times[i])
    return ProximalityReport(forward_proximal=first_hit is not None,
                             min_distance=float(best),
                             first_hit_offset=first_hit,
                             scanned=k_max + 1)


def classify_homogeneity(s: OmegaSample, tol: float | None = None) -> str:
    """HOMOGENEOUS / INHOMOGENEOUS / MIXED across the snapshot library."""
    if len(s) == 0:
        raise InsufficientData("empty omega sample")
    if tol is None:
        flags = s.homog_flags
    else:
        flags = np.array([is_homogeneous(s.field(i), tol) for i in range(len(s))])
    if flags.all():
        return HOMOGENEOUS
    if not flags.any():
        return INHOMOGENEOUS
    return MIXED

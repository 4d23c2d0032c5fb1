"""Experiment orchestration: one config in, artifacts plus manifest out.

A run executes the solver, then each enabled diagnostic, and persists
snapshots, CSV series and a human-readable summary.  Artifact bytes are
deterministic given the config (wall-clock times live only in the manifest).
"""

from __future__ import annotations

import datetime
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .circleflow import extract_phase, verify_reduction
from .config import (ScenarioConfig, build_forcing, build_grid,
                     build_initial_condition, build_nonlinearity, config_hash,
                     serialize_config)
from .dynamics import classify_homogeneity, fiber_multiplicity, \
    recurrence_diagnostic, sample_omega
from .errors import CircleLabError, InsufficientData
from .forcing import appendix_series, integral_signal
from .io import (RunManifest, fmt, sha256_file, write_manifest,
                 write_omega_sample, write_phase_csv, write_spectrum_csv,
                 write_trajectory_snapshots, write_zero_series_csv)
from .spectral import Trajectory, evolve
from .spectrum import lyapunov_exponents
from .symmetry import spatial_period
from .zeros import monitor_difference

PHI_LOWER_BOUND_EXPONENT = -2.0 * math.pi - 2.0  # log of the dyadic-time bound


@dataclass
class RunResult:
    manifest: RunManifest
    manifest_path: Path
    zero_violations: int


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _rolled(traj: Trajectory) -> Trajectory:
    """The trajectory of the one-cell rotated initial state.

    Translation invariance makes the rotation of a solution a solution, so
    this gives a second solution of the same equation without a second solve.
    """
    return Trajectory(grid=traj.grid, forcing=traj.forcing,
                      nonlinearity=traj.nonlinearity, dt=traj.dt,
                      stride=traj.stride, times=traj.times.copy(),
                      states=np.roll(traj.states, -1, axis=1),
                      order=traj.order, dealiased=traj.dealiased,
                      ceiling=traj.ceiling)


def run_scenario(cfg: ScenarioConfig, cfg_text: str | None = None,
                 out_override: str | None = None,
                 seed_override: int | None = None,
                 quiet: bool = False) -> RunResult:
    """Execute a scenario and persist its artifacts.

    Module errors (blow-up included) are recorded in a failed manifest rather
    than raised.  Returns the manifest plus the count of zero-monitor
    violations (nonzero means a diagnostic invariant was broken).
    """
    out = Path(out_override if out_override is not None else cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    text = cfg_text if cfg_text is not None else serialize_config(cfg)
    started = _now()
    artifacts: list[Path] = []
    summary: list[str] = []
    status = "success"
    error = None
    zero_violations = 0
    tol = cfg.tolerances

    summary.append(f"circlelab {__version__}")
    summary.append(f"config sha256 {config_hash(text)}")
    summary.append(f"grid n={cfg.grid.n} dt={fmt(cfg.time.dt)} "
                   f"t_end={fmt(cfg.time.t_end)} stride={cfg.time.stride}")
    try:
        grid = build_grid(cfg)
        g = build_forcing(cfg)
        nl = build_nonlinearity(cfg)
        u0 = build_initial_condition(cfg, grid, seed_override)
        traj = evolve(u0, g, nl, cfg.time.t_end, cfg.time.dt,
                      stride=cfg.time.stride, ceiling=tol.blowup_ceiling)
        summary.append(f"samples {len(traj)} final sup-norm "
                       f"{fmt(traj.field(len(traj) - 1).sup_norm)}")

        if cfg.diagnostics.snapshots:
            artifacts += write_trajectory_snapshots(out / "snapshots", traj)

        if cfg.diagnostics.zeros:
            series = monitor_difference(traj, _rolled(traj), tol.zero_tol_rel)
            p = out / "zeros.csv"
            write_zero_series_csv(p, series)
            artifacts.append(p)
            zero_violations = len(series.violations)
            counted = [c for c in series.counts if c is not None]
            summary.append(
                "zeros: monitored z(u - sigma_h u); "
                f"samples={len(counted)} drops={len(series.drop_events)} "
                f"last_drop_t={fmt(series.last_drop_time)} "
                f"violations={zero_violations}")

        if cfg.diagnostics.phase:
            period = spatial_period(traj.field(0), tol.amp_tol)
            track = extract_phase(traj, period.L)
            p = out / "phase.csv"
            write_phase_csv(p, track)
            artifacts.append(p)
            report = verify_reduction(traj, track, nl, tol.eps_g_rel)
            span = float(track.times[-1] - track.times[0])
            drift = float(track.c[-1] - track.c[0]) / span if span else 0.0
            summary.append(
                f"phase: L={fmt(period.L)} drift={fmt(drift)} "
                f"ode_residual_max={fmt(report.ode_residual_max)} "
                f"flagged={len(report.flagged_times)}")
            if abs(drift - 1.0) <= 1e-3:
                summary.append(
                    "phase: drift within 1e-3 of unit speed; consistent with "
                    "c(t) = t + const (mod L)")

        if cfg.diagnostics.spectrum:
            base = traj if cfg.time.stride == 1 else evolve(
                u0, g, nl, cfg.time.t_end, cfg.time.dt, stride=1,
                ceiling=tol.blowup_ceiling)
            est = lyapunov_exponents(base, m=cfg.diagnostics.frame_size,
                                     reorth_every=cfg.diagnostics.reorth_every,
                                     window=cfg.time.t_end, eps_c=tol.eps_c,
                                     seed=cfg.diagnostics.seed)
            p = out / "spectrum.csv"
            write_spectrum_csv(p, est)
            artifacts.append(p)
            table = "  ".join(f"{fmt(x)}(+-{fmt(s)})"
                              for x, s in zip(est.exponents, est.stderr))
            summary.append(f"spectrum: exponent estimates {table}")
            summary.append(f"spectrum: dim_u={est.dim_u} dim_c={est.dim_c} "
                           f"N_u={est.N_u} (eps_c={fmt(est.center_band)}, "
                           f"window={fmt(est.window)}; estimates, not certified "
                           "spectrum intervals)")

        if cfg.diagnostics.omega:
            transient = cfg.time.transient
            if transient < 0.0:
                transient = 0.2 * cfg.time.t_end
            sample = sample_omega(
                u0, g, nl, transient, cfg.time.t_end, cfg.time.stride,
                cfg.time.dt, cluster_eps=tol.cluster_eps,
                homog_tol=tol.homog_tol, zero_tol_rel=tol.zero_tol_rel,
                ceiling=tol.blowup_ceiling)
            artifacts += write_omega_sample(out / "omega", sample)
            n_clusters = int(np.max(sample.cluster_labels)) + 1 if len(sample) else 0
            summary.append(f"omega: snapshots={len(sample)} transient={fmt(transient)} "
                           f"clusters={n_clusters} cluster_eps={fmt(sample.cluster_eps)}")
            verdict = classify_homogeneity(sample)
            summary.append(f"omega: homogeneity={verdict} (tol={fmt(sample.homog_tol)})")
            try:
                fib = fiber_multiplicity(sample, tol.hull_eps, tol.orbit_eps)
                summary.append(
                    f"omega: fiber bins={len(fib.base_bins)} "
                    f"max_multiplicity={fib.max_multiplicity} "
                    f"singleton_fraction={fmt(fib.singleton_fraction)} "
                    f"(hull_eps={fmt(fib.hull_eps)}, orbit_eps={fmt(fib.orbit_eps)})")
                rec = recurrence_diagnostic(sample, tol.recurrence_eps)
                summary.append(
                    f"omega: returns {rec.returned}/{rec.eligible} within "
                    f"window={fmt(rec.window)} at eps={fmt(rec.eps)}; "
                    f"minimal_like={rec.minimal_like} max_gap={fmt(rec.max_gap)}")
                if fib.max_multiplicity >= 2:
                    summary.append(
                        "omega: evidence consistent with an almost 1-cover "
                        "(multiple quotient classes over one base bin); finite "
                        "sampling cannot certify which structure case holds")
            except InsufficientData as exc:
                summary.append(f"omega: diagnostics skipped ({exc})")
    except CircleLabError as exc:
        status = "failed"
        error = f"{type(exc).__name__}: {exc}"
        summary.append(f"FAILED {error}")

    p = out / "summary.txt"
    with open(p, "w") as fh:
        fh.write("\n".join(summary) + "\n")
    artifacts.append(p)

    manifest = RunManifest(
        version=__version__, config_hash=config_hash(text), started=started,
        finished=_now(), status=status, error=error,
        artifacts=[(str(a.relative_to(out)), sha256_file(a)) for a in artifacts])
    mp = out / "manifest.json"
    write_manifest(mp, manifest)
    if not quiet:
        for line in summary:
            print(line)
    return RunResult(manifest=manifest, manifest_path=mp,
                     zero_violations=zero_violations)


# -- dyadic-forcing verification (no PDE solve) --------------------------------

@dataclass
class AppendixCheckRow:
    n: int
    integral: float
    phi: float
    bound_ok: bool


@dataclass
class AppendixReport:
    rows: list
    dyadic_constant: float
    bound: float
    window_minima: list          # (m, min phi over [2^m, 2^{m+1}])
    running_minima: list
    strictly_decreasing: bool

    @property
    def all_bounds_hold(self) -> bool:
        return all(r.bound_ok for r in self.rows)


def verify_appendix(n_max: int, window_max_exponent: int = 13) -> AppendixReport:
    """Check phi(2^n) = e^{F(2^n)} against its lower bound, n = 1..n_max.

    Also reports per-window minima of phi over dyadic windows [2^m, 2^{m+1}]
    (sampled at spacing 1/8) whose strict decrease is the computable evidence
    for states approaching zero along a subsequence.
    """
    if n_max < 0 or n_max > 30:
        raise ValueError("n_max must lie in 0..30")
    sig = appendix_series()
    bound = math.exp(PHI_LOWER_BOUND_EXPONENT)
    rows = []
    for n in range(1, n_max + 1):
        F = float(integral_signal(sig, 2.0 ** n))
        rows.append(AppendixCheckRow(n=n, integral=F, phi=math.exp(F),
                                     bound_ok=math.exp(F) >= bound))
    window_minima = []
    running = []
    best = math.inf
    if n_max >= 1:
        for m in range(0, min(window_max_exponent, 30) + 1):
            a, b = 2.0 ** m, 2.0 ** (m + 1)
            ts = np.arange(a, b + 0.0625, 0.125)
            Fmin = float(np.min(integral_signal(sig, ts)))
            phi_min = math.exp(Fmin)
            window_minima.append((m, phi_min))
            best = min(best, phi_min)
            running.append(best)
    strictly = all(running[i] < running[i - 1] for i in range(1, len(running)))
    # The dyadic-time value is one constant for every n >= 1.
    const = rows[0].integral if rows else float("nan")
    return AppendixReport(rows=rows, dyadic_constant=const, bound=bound,
                          window_minima=window_minima, running_minima=running,
                          strictly_decreasing=strictly)


def format_appendix_report(report: AppendixReport) -> str:
    lines = ["dyadic-time lower-bound check (phi = exp integral of forcing)"]
    if not report.rows:
        lines.append("empty report (n_max = 0)")
        return "\n".join(lines) + "\n"
    lines.append(f"bound e^(-2 pi - 2) = {fmt(report.bound)}")
    lines.append(f"dyadic constant F(2^n) = {fmt(report.dyadic_constant)} "
                 f"(phi = {fmt(math.exp(report.dyadic_constant))})")
    for r in report.rows:
        lines.append(f"n={r.n:2d}  F={fmt(r.integral)}  phi={fmt(r.phi)}  "
                     f"bound {'ok' if r.bound_ok else 'VIOLATED'}")
    lines.append("window minima of phi over [2^m, 2^(m+1)] (running min):")
    for (m, wmin), run in zip(report.window_minima, report.running_minima):
        lines.append(f"m={m:2d}  min={fmt(wmin)}  running={fmt(run)}")
    lines.append("running minimum strictly decreasing: "
                 + ("yes" if report.strictly_decreasing else "no"))
    lines.append("all bounds hold: " + ("yes" if report.all_bounds_hold else "NO"))
    return "\n".join(lines) + "\n"

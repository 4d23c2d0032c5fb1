"""Scenario configuration: sectioned key=value text, validated dataclasses.

Grammar: sections in square brackets, one key = value pair per line, ``#``
comments.  Mode lists are comma-separated ``amp:freq:phase`` triples; a bare
number inside a coefficient is a constant term and the literal ``appendix``
selects the built-in adaptive dyadic series.  Unknown sections or keys are
rejected with their location; duplicate keys name the offending line.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ParseError, ValidationError
from .forcing import (HullPoint, Nonlinearity, QuasiPeriodicSignal,
                      appendix_series)
from .spectral import CircleGrid, Field


@dataclass
class GridConfig:
    n: int = 64


@dataclass
class TimeConfig:
    dt: float = 1e-3
    t_end: float = 10.0
    transient: float = -1.0   # negative = auto (20% of t_end where needed)
    stride: int = 10


@dataclass
class CoefficientSpec:
    """One nonlinearity coefficient: constant + modes + optional dyadic part."""

    constant: float = 0.0
    modes: tuple = ()
    appendix: bool = False

    def build(self) -> QuasiPeriodicSignal:
        return QuasiPeriodicSignal(
            modes=np.array(self.modes, dtype=float).reshape(-1, 3),
            constant=self.constant, adaptive=self.appendix)

    def render(self) -> str:
        parts = []
        if self.appendix:
            parts.append("appendix")
        if self.constant != 0.0 or not (self.appendix or self.modes):
            parts.append(repr(self.constant))
        parts.extend(f"{repr(a)}:{repr(w)}:{repr(p)}" for a, w, p in self.modes)
        return ", ".join(parts)


@dataclass
class ForcingConfig:
    kind: str = "appendix"
    modes: tuple = ()
    constant: float = 0.0
    offset: float = 0.0


@dataclass
class NonlinearityConfig:
    A: CoefficientSpec = field(default_factory=CoefficientSpec)
    B: CoefficientSpec = field(default_factory=CoefficientSpec)
    C: CoefficientSpec = field(default_factory=CoefficientSpec)
    D: CoefficientSpec = field(default_factory=CoefficientSpec)
    E: CoefficientSpec = field(default_factory=CoefficientSpec)


@dataclass
class ICConfig:
    preset: str = "sin"


@dataclass
class DiagnosticsConfig:
    zeros: bool = False
    phase: bool = False
    spectrum: bool = False
    omega: bool = False
    snapshots: bool = True
    frame_size: int = 5
    reorth_every: int = 10
    seed: int = 0


@dataclass
class OutputConfig:
    dir: str = "out"


@dataclass
class ToleranceConfig:
    zero_tol_rel: float = 1e-9
    eps_c: float = 0.05
    eps_g_rel: float = 1e-6
    homog_tol: float = 1e-6
    amp_tol: float = 1e-8
    blowup_ceiling: float = 1e8
    cluster_eps: float | None = None
    hull_eps: float | None = None
    orbit_eps: float | None = None
    recurrence_eps: float = 0.02


@dataclass
class ScenarioConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    forcing: ForcingConfig = field(default_factory=ForcingConfig)
    nonlinearity: NonlinearityConfig = field(default_factory=NonlinearityConfig)
    ic: ICConfig = field(default_factory=ICConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)


_SECTIONS = ("grid", "time", "forcing", "nonlinearity", "ic", "diagnostics",
             "output", "tolerances")
_BOOL_WORDS = {"true": True, "yes": True, "1": True,
               "false": False, "no": False, "0": False}


def _parse_bool(sec_key, raw):
    word = raw.strip().lower()
    if word not in _BOOL_WORDS:
        raise ValidationError(sec_key, f"expected a boolean, got {raw!r}")
    return _BOOL_WORDS[word]


def _parse_float(sec_key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(sec_key, f"expected a number, got {raw!r}") from None


def _parse_int(sec_key, raw):
    try:
        v = float(raw)
    except ValueError:
        raise ValidationError(sec_key, f"expected an integer, got {raw!r}") from None
    if v != int(v):
        raise ValidationError(sec_key, f"expected an integer, got {raw!r}")
    return int(v)


def _parse_coefficient(sec_key, raw) -> CoefficientSpec:
    constant = 0.0
    modes = []
    adaptive = False
    for item in (s.strip() for s in raw.split(",")):
        if not item:
            continue
        if item.lower() == "appendix":
            adaptive = True
            continue
        if ":" in item:
            pieces = item.split(":")
            if len(pieces) != 3:
                raise ValidationError(sec_key, f"mode triple must be amp:freq:phase, got {item!r}")
            amp, freq, phase = (_parse_float(sec_key, p) for p in pieces)
            if freq <= 0.0:
                raise ValidationError(sec_key, f"mode frequency must be positive, got {freq}")
            modes.append((amp, freq, phase))
            continue
        constant += _parse_float(sec_key, item)
    return CoefficientSpec(constant=constant, modes=tuple(modes), appendix=adaptive)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario text; defaults fill whatever is omitted."""
    cfg = ScenarioConfig()
    section = None
    seen: set[tuple[str, str]] = set()
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(lineno, f"malformed section header {line!r}")
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ValidationError(section, f"unknown section (line {lineno})")
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected key = value, got {line!r}")
        if section is None:
            raise ParseError(lineno, "key/value pair outside any section")
        key, _, raw = line.partition("=")
        key = key.strip().lower()
        raw = raw.strip()
        if (section, key) in seen:
            raise ParseError(lineno, f"duplicate key '{key}' in section [{section}]")
        seen.add((section, key))
        _apply(cfg, section, key, raw, lineno)
    _validate(cfg)
    return cfg


def _apply(cfg: ScenarioConfig, section: str, key: str, raw: str, lineno: int):
    sec_key = f"{section}.{key}"
    if section == "grid":
        if key == "n":
            cfg.grid.n = _parse_int(sec_key, raw)
            return
    elif section == "time":
        if key in ("dt", "t_end", "transient"):
            setattr(cfg.time, key, _parse_float(sec_key, raw))
            return
        if key == "stride":
            cfg.time.stride = _parse_int(sec_key, raw)
            return
    elif section == "forcing":
        if key == "kind":
            cfg.forcing.kind = raw.strip().lower()
            return
        if key == "modes":
            spec = _parse_coefficient(sec_key, raw)
            if spec.appendix:
                raise ValidationError(sec_key, "use kind = appendix for the built-in series")
            cfg.forcing.modes = spec.modes
            cfg.forcing.constant += spec.constant
            return
        if key == "constant":
            cfg.forcing.constant = _parse_float(sec_key, raw)
            return
        if key == "offset":
            cfg.forcing.offset = _parse_float(sec_key, raw)
            return
    elif section == "nonlinearity":
        if key in ("a", "b", "c", "d", "e"):
            setattr(cfg.nonlinearity, key.upper(), _parse_coefficient(sec_key, raw))
            return
    elif section == "ic":
        if key == "preset":
            cfg.ic.preset = raw.strip()
            return
    elif section == "diagnostics":
        if key in ("zeros", "phase", "spectrum", "omega", "snapshots"):
            setattr(cfg.diagnostics, key, _parse_bool(sec_key, raw))
            return
        if key in ("frame_size", "reorth_every", "seed"):
            setattr(cfg.diagnostics, key, _parse_int(sec_key, raw))
            return
    elif section == "output":
        if key == "dir":
            cfg.output.dir = raw.strip()
            return
    elif section == "tolerances":
        tol_fields = {f.name for f in fields(ToleranceConfig)}
        if key in tol_fields:
            setattr(cfg.tolerances, key, _parse_float(sec_key, raw))
            return
    raise ValidationError(sec_key, f"unknown key (line {lineno})")


def _validate(cfg: ScenarioConfig):
    n = cfg.grid.n
    if n < 16 or (n & (n - 1)) != 0:
        raise ValidationError("grid.n", f"must be a power of two >= 16, got {n}")
    if cfg.time.dt <= 0.0:
        raise ValidationError("time.dt", "must be positive")
    if cfg.time.t_end <= 0.0:
        raise ValidationError("time.t_end", "must be positive")
    steps = cfg.time.t_end / cfg.time.dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ValidationError("time.t_end", "must be an integer multiple of dt")
    if cfg.time.transient >= cfg.time.t_end:
        raise ValidationError("time.transient", "must lie below t_end (or be negative for auto)")
    if cfg.time.stride < 1:
        raise ValidationError("time.stride", "must be a positive integer")
    if cfg.forcing.kind not in ("appendix", "modes"):
        raise ValidationError("forcing.kind", f"unknown kind {cfg.forcing.kind!r}")
    _validate_preset(cfg.ic.preset)
    if cfg.diagnostics.frame_size < 1:
        raise ValidationError("diagnostics.frame_size", "must be positive")
    if cfg.diagnostics.frame_size > n // 4:
        raise ValidationError("diagnostics.frame_size", "must not exceed grid.n / 4")
    if cfg.diagnostics.reorth_every < 1:
        raise ValidationError("diagnostics.reorth_every", "must be positive")
    for name in ("zero_tol_rel", "eps_c", "eps_g_rel", "homog_tol", "amp_tol",
                 "blowup_ceiling", "recurrence_eps"):
        if getattr(cfg.tolerances, name) <= 0.0:
            raise ValidationError(f"tolerances.{name}", "must be positive")


def _validate_preset(preset: str):
    p = preset.strip()
    if p == "sin":
        return
    if p.startswith("sin_"):
        try:
            k = int(p[4:])
        except ValueError:
            raise ValidationError("ic.preset", f"bad mode number in {p!r}") from None
        if k < 1:
            raise ValidationError("ic.preset", "mode number must be >= 1")
        return
    if p.startswith("const:"):
        _parse_float("ic.preset", p[6:])
        return
    if p.startswith("random:"):
        pieces = p.split(":")
        if len(pieces) != 3:
            raise ValidationError("ic.preset", "random preset is random:seed:modes")
        _parse_int("ic.preset", pieces[1])
        m = _parse_int("ic.preset", pieces[2])
        if m < 1:
            raise ValidationError("ic.preset", "random preset needs >= 1 mode")
        return
    raise ValidationError("ic.preset", f"unknown preset {p!r}")


# -- builders ----------------------------------------------------------------

def build_grid(cfg: ScenarioConfig) -> CircleGrid:
    return CircleGrid(cfg.grid.n)


def build_forcing(cfg: ScenarioConfig) -> HullPoint:
    if cfg.forcing.kind == "appendix":
        base = appendix_series()
    else:
        base = QuasiPeriodicSignal(
            modes=np.array(cfg.forcing.modes, dtype=float).reshape(-1, 3),
            constant=cfg.forcing.constant)
    return HullPoint(base, cfg.forcing.offset)


def build_nonlinearity(cfg: ScenarioConfig) -> Nonlinearity:
    nc = cfg.nonlinearity
    return Nonlinearity(A=nc.A.build(), B=nc.B.build(), C=nc.C.build(),
                        D=nc.D.build(), E=nc.E.build())


def mode_field(grid: CircleGrid, cos_coeffs: dict, sin_coeffs: dict,
               mean: float = 0.0) -> Field:
    """Field from explicit mode coefficients, carrying its exact spectrum."""
    uhat = np.zeros(grid.n // 2 + 1, dtype=complex)
    uhat[0] = mean * grid.n
    for k, a in cos_coeffs.items():
        uhat[k] += 0.5 * grid.n * a
    for k, b in sin_coeffs.items():
        uhat[k] += -0.5j * grid.n * b
    return Field.from_spectrum(grid, uhat)


def build_initial_condition(cfg: ScenarioConfig, grid: CircleGrid,
                            seed_override: int | None = None) -> Field:
    p = cfg.ic.preset.strip()
    if p == "sin":
        return mode_field(grid, {}, {1: 1.0})
    if p.startswith("sin_"):
        k = int(p[4:])
        return mode_field(grid, {}, {k: 1.0})
    if p.startswith("const:"):
        return mode_field(grid, {}, {}, mean=float(p[6:]))
    pieces = p.split(":")
    seed = int(pieces[1]) if seed_override is None else seed_override
    n_modes = int(pieces[2])
    return random_field(grid, seed, n_modes)


def random_field(grid: CircleGrid, seed: int, n_modes: int,
                 sup: float = 1.0) -> Field:
    """Seeded band-limited field with 1/k mode decay, normalized in sup norm."""
    rng = np.random.default_rng(seed)
    cos_c = {}
    sin_c = {}
    for k in range(1, n_modes + 1):
        a, b = rng.standard_normal(2) / k
        cos_c[k] = a
        sin_c[k] = b
    raw = mode_field(grid, cos_c, sin_c)
    peak = raw.sup_norm
    scale = sup / peak if peak > 0 else 1.0
    return Field.from_spectrum(grid, raw.spectrum() * scale)


# -- serialization ------------------------------------------------------------

def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) reproduces cfg."""
    d = cfg.diagnostics
    t = cfg.tolerances
    lines = [
        "[grid]",
        f"n = {cfg.grid.n}",
        "",
        "[time]",
        f"dt = {repr(cfg.time.dt)}",
        f"t_end = {repr(cfg.time.t_end)}",
        f"transient = {repr(cfg.time.transient)}",
        f"stride = {cfg.time.stride}",
        "",
        "[forcing]",
        f"kind = {cfg.forcing.kind}",
    ]
    if cfg.forcing.modes:
        rendered = ", ".join(f"{repr(a)}:{repr(w)}:{repr(p)}"
                             for a, w, p in cfg.forcing.modes)
        lines.append(f"modes = {rendered}")
    if cfg.forcing.constant != 0.0:
        lines.append(f"constant = {repr(cfg.forcing.constant)}")
    if cfg.forcing.offset != 0.0:
        lines.append(f"offset = {repr(cfg.forcing.offset)}")
    lines += [
        "",
        "[nonlinearity]",
        f"A = {cfg.nonlinearity.A.render()}",
        f"B = {cfg.nonlinearity.B.render()}",
        f"C = {cfg.nonlinearity.C.render()}",
        f"D = {cfg.nonlinearity.D.render()}",
        f"E = {cfg.nonlinearity.E.render()}",
        "",
        "[ic]",
        f"preset = {cfg.ic.preset}",
        "",
        "[diagnostics]",
        f"zeros = {str(d.zeros).lower()}",
        f"phase = {str(d.phase).lower()}",
        f"spectrum = {str(d.spectrum).lower()}",
        f"omega = {str(d.omega).lower()}",
        f"snapshots = {str(d.snapshots).lower()}",
        f"frame_size = {d.frame_size}",
        f"reorth_every = {d.reorth_every}",
        f"seed = {d.seed}",
        "",
        "[output]",
        f"dir = {cfg.output.dir}",
        "",
        "[tolerances]",
        f"zero_tol_rel = {repr(t.zero_tol_rel)}",
        f"eps_c = {repr(t.eps_c)}",
        f"eps_g_rel = {repr(t.eps_g_rel)}",
        f"homog_tol = {repr(t.homog_tol)}",
        f"amp_tol = {repr(t.amp_tol)}",
        f"blowup_ceiling = {repr(t.blowup_ceiling)}",
    ]
    for name in ("cluster_eps", "hull_eps", "orbit_eps"):
        v = getattr(t, name)
        if v is not None:
            lines.append(f"{name} = {repr(v)}")
    lines.append(f"recurrence_eps = {repr(t.recurrence_eps)}")
    return "\n".join(lines) + "\n"


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()

"""Persistence: snapshot binary format, CSV exports, and the run manifest.

Snapshot format (fixed, little-endian): magic ``CPL1``, uint32 n_points,
float64 t, float64 tau (hull offset), then n_points float64 values.  CSV
files use ``.`` decimals, ``\\n`` line endings, a header row, and 17
significant digits so doubles round-trip losslessly.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SNAPSHOT_MAGIC = b"CPL1"


def fmt(x) -> str:
    """Lossless float-to-text (17 significant digits)."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_snapshot(path, t: float, tau: float, values: np.ndarray):
    values = np.asarray(values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", values.size))
        fh.write(struct.pack("<d", float(t)))
        fh.write(struct.pack("<d", float(tau)))
        fh.write(values.tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (n,) = struct.unpack("<I", fh.read(4))
        (t,) = struct.unpack("<d", fh.read(8))
        (tau,) = struct.unpack("<d", fh.read(8))
        data = fh.read(8 * n)
        if len(data) != 8 * n:
            raise ValueError(f"{path}: truncated payload")
        values = np.frombuffer(data, dtype="<f8").copy()
    return t, tau, values


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_zero_series_csv(path, series):
    rows = []
    for i, t in enumerate(series.times):
        zc = series.counts[i]
        if zc is None:
            rows.append((t, -1, 0, 1))
        else:
            rows.append((t, zc.count, zc.all_simple, zc.ambiguous))
    write_csv(path, ("t", "count", "all_simple", "ambiguous"), rows)


def write_phase_csv(path, track):
    rows = [(track.times[i], track.c[i], track.cdot[i], track.max_values[i],
             track.phixx_at_max[i]) for i in range(track.times.size)]
    write_csv(path, ("t", "c", "cdot", "m", "phixx_at_max"), rows)


def write_spectrum_csv(path, est):
    with open(path, "w", newline="") as fh:
        fh.write("rank,exponent,stderr\n")
        for r, (lam, se) in enumerate(zip(est.exponents, est.stderr), start=1):
            fh.write(f"{r},{fmt(lam)},{fmt(se)}\n")
        fh.write("dim_u,dim_c,N_u\n")
        fh.write(f"{est.dim_u},{est.dim_c},{est.N_u}\n")


def write_trajectory_snapshots(dirpath, traj) -> list:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(len(traj)):
        p = d / f"snap_{i:06d}.bin"
        write_snapshot(p, float(traj.times[i]),
                       traj.forcing.offset + float(traj.times[i]),
                       traj.states[i])
        paths.append(p)
    return paths


def write_omega_sample(dirpath, sample) -> list:
    """Snapshot directory plus index CSV t,tau,cluster,homog,zcount."""
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(len(sample)):
        p = d / f"snap_{i:06d}.bin"
        write_snapshot(p, float(sample.times[i]), float(sample.offsets[i]),
                       sample.states[i])
        paths.append(p)
    index = d / "index.csv"
    rows = [(sample.times[i], sample.offsets[i], sample.cluster_labels[i],
             sample.homog_flags[i], sample.zcounts[i])
            for i in range(len(sample))]
    write_csv(index, ("t", "tau", "cluster", "homog", "zcount"), rows)
    paths.append(index)
    return paths


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    version: str
    config_hash: str
    started: str
    finished: str
    status: str = "success"
    error: str | None = None
    artifacts: list = field(default_factory=list)  # (relative path, sha256)

    def to_json(self) -> str:
        return json.dumps({
            "version": self.version,
            "config_hash": self.config_hash,
            "started": self.started,
            "finished": self.finished,
            "status": self.status,
            "error": self.error,
            "artifacts": [{"path": p, "sha256": h} for p, h in self.artifacts],
        }, indent=2) + "\n"


def write_manifest(path, manifest: RunManifest):
    with open(path, "w") as fh:
        fh.write(manifest.to_json())


def load_manifest(path) -> RunManifest:
    with open(path) as fh:
        d = json.load(fh)
    return RunManifest(version=d["version"], config_hash=d["config_hash"],
                       started=d["started"], finished=d["finished"],
                       status=d["status"], error=d.get("error"),
                       artifacts=[(a["path"], a["sha256"]) for a in d["artifacts"]])


def verify_manifest(path) -> bool:
    """Recompute artifact checksums; False if any file is missing or altered."""
    base = Path(path).parent
    man = load_manifest(path)
    for rel, digest in man.artifacts:
        p = base / rel
        if not p.exists() or sha256_file(p) != digest:
            return False
    return True

"""On-disk artifacts: binary field snapshots and CSV series with provenance headers.

Snapshot layout (little-endian)::

    5 bytes  magic  b"HWND1"
    u32      nx, ny, nz     (nz = 0 marks a surface field)
    u8       boundary tag   (0 Neumann-Neumann, 1 Dirichlet-Neumann)
    f64      h
    u8       component count
    f64[]    physical samples in (component, z, y, x) order

CSV files start with ``# key: value`` provenance lines, then a header row.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import fields as F
from .errors import ArtifactError, DomainError, HydrowindError
from .grid import BCCase, GridSpec

MAGIC = b"HWND1"
HEADER = struct.Struct("<5sIIIBdB")


def _write_raw(path, grid: GridSpec, nz: int, samples: np.ndarray):
    data = np.ascontiguousarray(samples, dtype="<f8")
    head = HEADER.pack(MAGIC, grid.nx, grid.ny, nz, grid.bc.tag, grid.h, data.shape[0])
    try:
        with open(path, "wb") as fh:
            fh.write(head)
            fh.write(data.tobytes())
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc


def write_snapshot_raw(path, grid: GridSpec, samples: np.ndarray, surface: bool = False) -> None:
    """Inverse of ``read_snapshot_raw``; bytes round-trip exactly."""
    samples = np.asarray(samples, dtype=float)
    _write_raw(path, grid, 0 if surface else grid.nz, samples)


def write_snapshot(path, field) -> None:
    """Store a volume or surface field as physical samples."""
    if isinstance(field, F.SurfaceField):
        samples = field.to_physical()
        _write_raw(path, field.grid, 0, samples[:, None])
        return
    _write_raw(path, field.grid, field.grid.nz, F.inverse_transform(field))


def read_snapshot_raw(path):
    """``(grid, samples, is_surface)`` exactly as stored."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    if len(blob) < HEADER.size:
        raise ArtifactError(f"{path}: truncated header")
    magic, nx, ny, nz, tag, h, ncomp = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ArtifactError(f"{path}: bad magic {magic!r}")
    surface = nz == 0
    depth = 1 if surface else nz
    count = ncomp * depth * ny * nx
    if len(blob) != HEADER.size + 8 * count:
        raise ArtifactError(f"{path}: expected {count} samples, file holds {(len(blob) - HEADER.size) / 8:g}")
    try:
        grid = GridSpec(nx, ny, max(nz, 3), h, BCCase.from_tag(tag))
    except HydrowindError as exc:
        raise ArtifactError(f"{path}: invalid header ({exc})") from exc
    samples = np.frombuffer(blob, dtype="<f8", offset=HEADER.size).reshape(ncomp, depth, ny, nx)
    return grid, samples.astype(float), surface


def read_snapshot(path):
    grid, samples, surface = read_snapshot_raw(path)
    if surface:
        return F.SurfaceField.from_physical(samples[:, 0], grid)
    return F.forward_transform(samples, grid)


# ---------------------------------------------------------------- CSV


def _write_header(fh, provenance: Mapping):
    for key, value in provenance.items():
        text = str(value).replace("\n", " ")
        fh.write(f"# {key}: {text}\n")


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], provenance: Mapping = ()) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            _write_header(fh, dict(provenance))
            w = csv.writer(fh)
            w.writerow(columns)
            for row in rows:
                w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc


def read_csv(path):
    """``(provenance, columns, rows)`` with numeric cells converted to float."""
    prov = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc
    body = []
    for line in lines:
        if line.startswith("# ") and not body:
            key, _, value = line[2:].rstrip("\n").partition(": ")
            prov[key] = value
        else:
            body.append(line)
    reader = list(csv.reader(body))
    if not reader:
        raise ArtifactError(f"{path}: no header row")

    def cell(x):
        try:
            return float(x)
        except ValueError:
            return x

    return prov, reader[0], [[cell(x) for x in r] for r in reader[1:] if r]


def write_trajectory(path, record, provenance: Mapping = ()) -> None:
    from .integrator import COLUMNS

    prov = dict(provenance)
    prov.update(path_id=record.path_id, path_seed=record.seed, status=record.status)
    if record.message:
        prov["message"] = record.message
    n = len(record.columns["t"])
    write_csv(path, COLUMNS, ([record.columns[c][i] for c in COLUMNS] for i in range(n)), prov)


def read_trajectory(path):
    """``(provenance, {column: array})``."""
    prov, cols, rows = read_csv(path)
    arr = np.array(rows, dtype=float).reshape(len(rows), len(cols))
    return prov, {c: arr[:, i] for i, c in enumerate(cols)}


def write_ensemble(path, ens, provenance: Mapping = ()) -> None:
    from .integrator import COLUMNS

    cols = [c for c in COLUMNS[1:] if c in ens.mean]
    names = ["t"] + [f"{c}_{s}" for c in cols for s in ("mean", "var")]
    rows = []
    for i, t in enumerate(ens.times):
        row = [t]
        for c in cols:
            row += [ens.mean[c][i], ens.var[c][i]]
        rows.append(row)
    prov = dict(provenance)
    prov.update(paths=ens.paths, failures=len(ens.failures))
    write_csv(path, names, rows, prov)


def write_ito(path, report, provenance: Mapping = ()) -> None:
    if report is None:
        raise DomainError("no Monte Carlo report to write")
    prov = dict(provenance)
    prov.update(paths=report.paths, fraction_within=report.fraction_within,
                mean_fraction_within=report.mean_fraction_within)
    write_csv(path, ("t", "slot", "mc_variance", "predicted", "z"), report.rows(), prov)

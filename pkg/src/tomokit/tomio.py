"""Versioned, deterministic files for states, tomograms and reports.

CSV files start with one comment line ``# format_version=1 kind=...``
followed by a fixed header; floats are written with 17 significant digits
so reading a file back gives bit-identical numbers. JSON is written by hand
(sorted keys, the same float format) so identical inputs always produce
identical bytes.
"""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    MalformedHeaderError,
    MissingFileError,
    NaNPayloadError,
    ParseError,
    PayloadShapeError,
    VersionMismatchError,
)
from .fock import density_diagnostics
from .forward import MarginalSlice, PhotonEntry, PhotonTomogram, SampleHistogram, Tomogram, WignerGrid

FORMAT_VERSION = "1"
HERMITICITY_WARN = 1e-6

TOMOGRAM_HEADER = ("x", "mu", "nu", "w")
PHOTON_HEADER = ("re_alpha", "im_alpha", "n", "w")
WIGNER_HEADER = ("q", "p", "w")
HISTOGRAM_HEADER = ("value", "count")


def fmt(v):
    return format(float(v), ".17g")


# ----------------------------------------------------------------- JSON


def _encode(obj):
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise NaNPayloadError(f"non-finite value {obj} cannot be written")
        return fmt(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag])
    if isinstance(obj, (str, Path)):
        return json.dumps(str(obj))
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON text (sorted keys, 17-digit floats, trailing newline)."""
    return _encode(obj) + "\n"


def _write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _read_text(path):
    path = Path(path)
    try:
        return path.read_text(encoding="ascii")
    except FileNotFoundError:
        raise MissingFileError(f"no such file: {path}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not an ASCII file", offset=exc.start) from None


def loads(text, source="<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg} at byte {exc.pos}", offset=exc.pos) from None


def write_json(path, obj):
    _write_text(path, dumps(obj))


def read_json(path):
    return loads(_read_text(path), str(path))


# -------------------------------------------------------------- density


@dataclass
class LoadReport:
    path: str
    warnings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def density_to_dict(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise PayloadShapeError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise NaNPayloadError("density matrix has non-finite entries")
    return {"dim": rho.shape[0], "re": rho.real.ravel(), "im": rho.imag.ravel()}


def density_from_dict(obj, source="<density>"):
    if not isinstance(obj, dict) or not {"dim", "re", "im"} <= obj.keys():
        raise MalformedHeaderError(f"{source}: expected keys dim, re, im")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise PayloadShapeError(f"{source}: dim must be a positive integer, got {dim!r}")
    re, im = obj["re"], obj["im"]
    if not isinstance(re, list) or not isinstance(im, list):
        raise PayloadShapeError(f"{source}: re and im must be arrays")
    if len(re) != dim * dim or len(im) != dim * dim:
        raise PayloadShapeError(
            f"{source}: dim={dim} needs {dim * dim} entries, got re={len(re)}, im={len(im)}"
        )
    try:
        rho = np.array(re, dtype=float) + 1j * np.array(im, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{source}: non-numeric entries") from None
    if not np.all(np.isfinite(rho)):
        raise NaNPayloadError(f"{source}: non-finite entries")
    return rho.reshape(dim, dim)


def write_density(path, rho):
    write_json(path, density_to_dict(rho))


def load_density(path):
    """``(rho, LoadReport)``; Hermiticity violations are reported, not fatal."""
    rho = density_from_dict(read_json(path), str(path))
    report = LoadReport(str(path), diagnostics=density_diagnostics(rho))
    herm = report.diagnostics["herm_resid"]
    if herm > HERMITICITY_WARN:
        report.warnings.append(f"Hermiticity residual {herm:.3g} exceeds {HERMITICITY_WARN:g}")
    return rho, report


def read_density(path):
    rho, report = load_density(path)
    for msg in report.warnings:
        warnings.warn(f"{path}: {msg}", stacklevel=2)
    return rho


def write_report(path, report):
    write_json(path, report.as_dict() if hasattr(report, "as_dict") else report)


# ------------------------------------------------------------------ CSV


def _csv_text(kind, header, columns, meta=None):
    buf = io.StringIO()
    extra = "".join(f" {k}={v}" for k, v in (meta or {}).items())
    buf.write(f"# format_version={FORMAT_VERSION} kind={kind}{extra}\n")
    buf.write(",".join(header) + "\n")
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    if not np.all(np.isfinite(data)):
        raise NaNPayloadError(f"{kind} payload has non-finite values")
    if data.size:
        np.savetxt(buf, data, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def _parse_meta(line, source):
    fields = dict(part.split("=", 1) for part in line[1:].split() if "=" in part)
    version = fields.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{source}: format_version {version!r}, expected {FORMAT_VERSION!r}")
    return fields


def _read_csv(path, kind, header):
    text = _read_text(path)
    lines = text.split("\n")
    source = str(path)
    if not lines or not lines[0].startswith("#"):
        raise VersionMismatchError(f"{source}: missing '# format_version=...' line")
    meta = _parse_meta(lines[0], source)
    if meta.get("kind", kind) != kind:
        raise MalformedHeaderError(f"{source}: holds {meta['kind']!r}, expected {kind!r}")
    if len(lines) < 2 or tuple(h.strip() for h in lines[1].split(",")) != header:
        got = lines[1] if len(lines) > 1 else ""
        raise MalformedHeaderError(f"{source}: header {got!r}, expected {','.join(header)!r}")
    offset = len(lines[0]) + len(lines[1]) + 2
    rows = []
    for i, line in enumerate(lines[2:], start=3):
        if not line.strip():
            offset += len(line) + 1
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise MalformedHeaderError(
                f"{source}: header declares {len(header)} columns but line {i} has {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(f"{source}: line {i} is not numeric: {line!r}", offset=offset) from None
        offset += len(line) + 1
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0]) + 3
        raise NaNPayloadError(f"{source}: non-finite value on line {bad}")
    return data, meta


def _runs(keys):
    # start/stop of consecutive equal rows
    if len(keys) == 0:
        return []
    change = np.flatnonzero(np.any(np.diff(keys, axis=0) != 0, axis=1)) + 1
    edges = np.concatenate([[0], change, [len(keys)]])
    return list(zip(edges[:-1], edges[1:]))


def write_tomogram(path, tomo):
    """Write a :class:`Tomogram` or :class:`PhotonTomogram`.

    Quadrature slices are stored with ``x - delta`` (the shift-free marginal).
    """
    if isinstance(tomo, PhotonTomogram):
        cols = [[], [], [], []]
        for e in tomo.entries:
            n = e.probs.size
            cols[0].append(np.full(n, e.alpha.real))
            cols[1].append(np.full(n, e.alpha.imag))
            cols[2].append(np.arange(n, dtype=float))
            cols[3].append(e.probs)
        cols = [np.concatenate(c) if c else np.empty(0) for c in cols]
        _write_text(path, _csv_text("photon", PHOTON_HEADER, cols))
        return
    cols = [[], [], [], []]
    for s in tomo.slices:
        cols[0].append(s.centered_x)
        cols[1].append(np.full(s.x.size, s.mu))
        cols[2].append(np.full(s.x.size, s.nu))
        cols[3].append(s.w)
    cols = [np.concatenate(c) if c else np.empty(0) for c in cols]
    _write_text(path, _csv_text("tomogram", TOMOGRAM_HEADER, cols))


def read_tomogram(path, label="", grid=None):
    data, _ = _read_csv(path, "tomogram", TOMOGRAM_HEADER)
    slices = [
        MarginalSlice(float(data[a, 1]), float(data[a, 2]), data[a:b, 0].copy(), data[a:b, 3].copy())
        for a, b in _runs(data[:, 1:3])
    ]
    return Tomogram(slices, label, dict(grid or {}))


def read_photon_tomogram(path, label="", grid=None):
    data, _ = _read_csv(path, "photon", PHOTON_HEADER)
    entries = []
    for a, b in _runs(data[:, 0:2]):
        n = data[a:b, 2]
        if not np.array_equal(n, np.arange(b - a)):
            raise PayloadShapeError(f"{path}: counts for alpha on line {a + 3} are not 0, 1, 2, ...")
        probs = data[a:b, 3].copy()
        entries.append(PhotonEntry(complex(data[a, 0], data[a, 1]), probs, max(0.0, 1.0 - float(probs.sum()))))
    n_cut = max((e.probs.size for e in entries), default=0)
    return PhotonTomogram(entries, n_cut, label, dict(grid or {}))


def write_wigner(path, wgrid):
    qq, pp = np.meshgrid(wgrid.q, wgrid.p, indexing="ij")
    _write_text(path, _csv_text("wigner", WIGNER_HEADER, [qq.ravel(), pp.ravel(), wgrid.values.ravel()]))


def read_wigner(path):
    data, _ = _read_csv(path, "wigner", WIGNER_HEADER)
    q = np.unique(data[:, 0])
    p = np.unique(data[:, 1])
    if q.size * p.size != data.shape[0]:
        raise PayloadShapeError(f"{path}: records do not form a q-p grid")
    return WignerGrid(q, p, data[:, 2].reshape(q.size, p.size))


def write_histogram(path, hist):
    meta = {"shots": hist.shots, "seed": hist.seed, "sample": hist.kind}
    _write_text(path, _csv_text("histogram", HISTOGRAM_HEADER, [hist.values, hist.counts], meta))


def read_histogram(path):
    data, meta = _read_csv(path, "histogram", HISTOGRAM_HEADER)
    counts = data[:, 1].astype(np.int64)
    return SampleHistogram(data[:, 0].copy(), counts, int(meta.get("shots", counts.sum())), int(meta.get("seed", 0)), meta.get("sample", "quadrature"))


# ------------------------------------------------------------- manifest


SCHEMES = ("symplectic", "homodyne", "photon")


@dataclass
class DatasetManifest:
    scheme: str
    state: str
    grid: dict
    files: list
    seeds: list = field(default_factory=list)
    dim: int | None = None
    format_version: str = FORMAT_VERSION

    def as_dict(self):
        out = {
            "format_version": self.format_version,
            "scheme": self.scheme,
            "state": self.state,
            "grid": self.grid,
            "files": list(self.files),
            "seeds": list(self.seeds),
        }
        if self.dim is not None:
            out["dim"] = self.dim
        return out


MANIFEST_NAME = "manifest.json"


def write_manifest(directory, manifest):
    write_json(Path(directory) / MANIFEST_NAME, manifest.as_dict())


def read_manifest(path):
    """Load a manifest (file or directory); every referenced file must exist."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    obj = read_json(path)
    if not isinstance(obj, dict):
        raise MalformedHeaderError(f"{path}: manifest must be a JSON object")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: format_version {version!r}, expected {FORMAT_VERSION!r}")
    missing = [k for k in ("scheme", "state", "grid", "files") if k not in obj]
    if missing:
        raise MalformedHeaderError(f"{path}: manifest lacks {', '.join(missing)}")
    if obj["scheme"] not in SCHEMES:
        raise MalformedHeaderError(f"{path}: unknown scheme {obj['scheme']!r}")
    for name in obj["files"]:
        target = path.parent / name
        if not target.is_file():
            raise MissingFileError(f"manifest {path} references missing file {target}")
    return DatasetManifest(
        obj["scheme"], obj["state"], obj["grid"], obj["files"], obj.get("seeds", []), obj.get("dim"), version
    ), path.parent


def load_dataset(path):
    """``(manifest, tomogram)`` for a dataset directory or manifest path."""
    manifest, root = read_manifest(path)
    target = root / manifest.files[0]
    if manifest.scheme == "photon":
        tomo = read_photon_tomogram(target, manifest.state, manifest.grid)
    else:
        tomo = read_tomogram(target, manifest.state, manifest.grid)
    return manifest, tomo

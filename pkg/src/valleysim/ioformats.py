"""Output file formats.

Every file starts with '#'-prefixed provenance lines (version, config hash,
grid, units), then a column-name row, then numeric rows with 9 significant
digits.  Series files are comma separated; k-map files use the row layout
"kx ky band value" (space separated).  Writers are deterministic: identical
inputs give byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .errors import SchemaError

VERSION = "0.1.0"


def _fmt(x) -> str:
    return f"{float(x):.9g}"


def _header(kind: str, meta: dict) -> list:
    lines = [f"# valleysim {VERSION} {kind}"]
    for key, value in meta.items():
        lines.append(f"# {key} = {value}")
    return lines


def format_series(columns, meta: dict) -> str:
    """columns: list of (name, 1-d array) pairs, equal lengths."""
    names = [name for name, _ in columns]
    arrays = [np.asarray(vals, dtype=float) for _, vals in columns]
    if len({len(a) for a in arrays}) > 1:
        raise SchemaError("series columns must have equal lengths")
    lines = _header("series", meta)
    lines.append(",".join(names))
    for row in zip(*arrays):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_series(text: str):
    """-> (meta dict, column-name list, ndarray of shape (rows, cols))."""
    meta, rows, names = {}, [], None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        if names is None:
            names = [t.strip() for t in line.split(",")]
            continue
        rows.append([float(t) for t in line.split(",")])
    if names is None:
        raise SchemaError("no column header found in series file")
    data = np.array(rows, dtype=float)
    if data.size and data.shape[1] != len(names):
        raise SchemaError("row width does not match the column header")
    return meta, names, data


def format_kmap(kpoints, values, meta: dict) -> str:
    """kpoints (nk, 2); values (nk, nbands) -> one row per (k, band)."""
    kpoints = np.asarray(kpoints, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if len(kpoints) != len(values):
        raise SchemaError("kpoints/values length mismatch")
    lines = _header("kmap", meta)
    lines.append("kx ky band value")
    for i in range(len(kpoints)):
        kx, ky = _fmt(kpoints[i, 0]), _fmt(kpoints[i, 1])
        for b in range(values.shape[1]):
            lines.append(f"{kx} {ky} {b} {_fmt(values[i, b])}")
    return "\n".join(lines) + "\n"


def parse_kmap(text: str):
    """-> (meta, kpoints (nk, 2), values (nk, nbands)); row order preserved."""
    meta, rows = {}, []
    saw_header = False
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        if not saw_header:
            if line.split() != ["kx", "ky", "band", "value"]:
                raise SchemaError("k-map column header must be 'kx ky band value'")
            saw_header = True
            continue
        tokens = line.split()
        if len(tokens) != 4:
            raise SchemaError("k-map rows must hold 'kx ky band value'")
        rows.append([float(t) for t in tokens])
    if not saw_header:
        raise SchemaError("no column header found in k-map file")
    data = np.array(rows, dtype=float)
    nbands = int(data[:, 2].max()) + 1 if data.size else 0
    if data.size and len(data) % nbands != 0:
        raise SchemaError("incomplete band blocks in k-map file")
    nk = len(data) // nbands if nbands else 0
    kpoints = data.reshape(nk, nbands, 4)[:, 0, :2]
    values = data.reshape(nk, nbands, 4)[:, :, 3]
    return meta, kpoints, values


def lattice_meta(lattice) -> dict:
    """Reciprocal metadata used by plotting tools for the BZ outline."""
    return {
        "a1_angstrom": f"{_fmt(lattice.a1[0])} {_fmt(lattice.a1[1])}",
        "a2_angstrom": f"{_fmt(lattice.a2[0])} {_fmt(lattice.a2[1])}",
        "b1_inv_angstrom": f"{_fmt(lattice.b1[0])} {_fmt(lattice.b1[1])}",
        "b2_inv_angstrom": f"{_fmt(lattice.b2[0])} {_fmt(lattice.b2[1])}",
    }

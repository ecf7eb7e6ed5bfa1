"""Wannier90-style hr / tb file parsing and writing.

hr layout: comment line; num_bands; num_rpoints; degeneracies (15 integers
per line); then num_rpoints * num_bands^2 records "R1 R2 R3 m n Re Im" (eV).

tb layout: comment line; three lattice-vector lines (Angstrom); num_bands;
num_rpoints; degeneracy lines; then per R a blank line, an "R1 R2 R3" line,
num_bands^2 Hamiltonian lines "m n Re Im", and num_bands^2 position lines
"m n Re_x Im_x Re_y Im_y Re_z Im_z" (Angstrom).

Parsing is whitespace tolerant but rejects anything after the declared
record counts.  All failures raise typed errors; this parser must not crash
on arbitrary input.
"""

from __future__ import annotations

import numpy as np

from .errors import MissingPositions, ParseError, SchemaError, ValidationError
from .lattice import WannierModel

HERMITICITY_TOL_EV = 1e-6
DIAG_POSITION_TOL = 1e-6
PER_LINE_DEGENERACIES = 15


class _LineReader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next_content(self, context: str) -> tuple[str, int]:
        """Next non-blank line and its 1-based number; SchemaError at EOF."""
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            self.pos += 1
            if line.strip():
                return line, self.pos
        raise SchemaError(f"unexpected end of file while reading {context}")

    def rest_is_blank(self) -> bool:
        return all(not line.strip() for line in self.lines[self.pos:])


def _ints(line: str, lineno: int, count: int | None = None):
    tokens = line.split()
    if count is not None and len(tokens) != count:
        raise SchemaError(f"line {lineno}: expected {count} integers, got {len(tokens)}")
    out = []
    for tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(f"bad integer {tok!r}", line=lineno) from None
    return out


def _floats(tokens, lineno: int):
    out = []
    for tok in tokens:
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"bad number {tok!r}", line=lineno) from None
    return out


def _read_counts_and_degeneracies(reader: _LineReader):
    line, no = reader.next_content("number of bands")
    (num_bands,) = _ints(line, no, 1)
    line, no = reader.next_content("number of R points")
    (num_rpoints,) = _ints(line, no, 1)
    if num_bands < 1 or num_rpoints < 1:
        raise SchemaError("band and R-point counts must be positive")
    degeneracies = []
    while len(degeneracies) < num_rpoints:
        line, no = reader.next_content("degeneracy list")
        vals = _ints(line, no)
        degeneracies.extend(vals)
    if len(degeneracies) != num_rpoints:
        raise SchemaError(f"degeneracy list holds {len(degeneracies)} entries, "
                          f"expected {num_rpoints}")
    if any(d <= 0 for d in degeneracies):
        raise SchemaError("degeneracies must be positive integers")
    return num_bands, num_rpoints, np.array(degeneracies, dtype=int)


def _as_text(stream) -> str:
    if isinstance(stream, str):
        return stream
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    return data


def _check_h0_hermitian(model: WannierModel):
    h0 = np.tensordot(1.0 / model.degeneracies, model.h_r, axes=([0], [0]))
    defect = np.abs(h0 - h0.conj().T).max()
    if defect > HERMITICITY_TOL_EV:
        raise ValidationError(
            f"H(k=0) is non-Hermitian by {defect:.3e} eV (> {HERMITICITY_TOL_EV:g})")


def parse_hr(stream) -> WannierModel:
    """Parse an hr-format file into a WannierModel without position data."""
    reader = _LineReader(_as_text(stream))
    comment, _ = reader.next_content("comment line")
    nb, nr, degeneracies = _read_counts_and_degeneracies(reader)

    rpoints = []
    rindex = {}
    h_r = np.zeros((nr, nb, nb), dtype=complex)
    seen = np.zeros((nr, nb, nb), dtype=bool)
    for _ in range(nr * nb * nb):
        line, no = reader.next_content("hopping records")
        tokens = line.split()
        if len(tokens) != 7:
            raise SchemaError(f"line {no}: expected 'R1 R2 R3 m n Re Im' (7 fields)")
        r = tuple(_ints(" ".join(tokens[:3]), no, 3))
        m, n = _ints(" ".join(tokens[3:5]), no, 2)
        re, im = _floats(tokens[5:7], no)
        if not (1 <= m <= nb and 1 <= n <= nb):
            raise SchemaError(f"line {no}: band index out of range 1..{nb}")
        if r not in rindex:
            if len(rpoints) >= nr:
                raise SchemaError(f"line {no}: more than {nr} distinct R points")
            rindex[r] = len(rpoints)
            rpoints.append(r)
        ir = rindex[r]
        if seen[ir, m - 1, n - 1]:
            raise SchemaError(f"line {no}: duplicate record for R={r}, m={m}, n={n}")
        seen[ir, m - 1, n - 1] = True
        h_r[ir, m - 1, n - 1] = complex(re, im)
    if len(rpoints) != nr:
        raise SchemaError(f"found {len(rpoints)} distinct R points, expected {nr}")
    if not seen.all():
        ir, m, n = np.argwhere(~seen)[0]
        raise SchemaError(f"missing record for R={rpoints[ir]}, m={m + 1}, n={n + 1}")
    if not reader.rest_is_blank():
        raise SchemaError(f"trailing content after the declared records "
                          f"(line {reader.pos + 1})")
    model = WannierModel(num_bands=nb, rpoints=np.array(rpoints, dtype=int),
                         degeneracies=degeneracies, h_r=h_r, comment=comment.strip())
    _check_h0_hermitian(model)
    return model


def parse_tb(stream) -> WannierModel:
    """Parse the tb format (Hamiltonian + position blocks per R)."""
    reader = _LineReader(_as_text(stream))
    comment, _ = reader.next_content("comment line")
    lattice = np.zeros((3, 3))
    for i in range(3):
        line, no = reader.next_content(f"lattice vector {i + 1}")
        vals = _floats(line.split(), no)
        if len(vals) != 3:
            raise SchemaError(f"line {no}: lattice vector needs 3 components")
        lattice[i] = vals
    nb, nr, degeneracies = _read_counts_and_degeneracies(reader)

    rpoints = np.zeros((nr, 3), dtype=int)
    h_r = np.zeros((nr, nb, nb), dtype=complex)
    r_r = np.zeros((nr, 3, nb, nb), dtype=complex)
    for ir in range(nr):
        try:
            line, no = reader.next_content(f"R block {ir + 1} header")
        except SchemaError:
            raise SchemaError(f"unexpected end of file: missing block for "
                              f"R index {ir + 1} of {nr}") from None
        rpoints[ir] = _ints(line, no, 3)
        seen = np.zeros((nb, nb), dtype=bool)
        for _ in range(nb * nb):
            line, no = reader.next_content(f"Hamiltonian block for R index {ir + 1}")
            tokens = line.split()
            if len(tokens) != 4:
                raise SchemaError(f"line {no}: expected 'm n Re Im' (4 fields)")
            m, n = _ints(" ".join(tokens[:2]), no, 2)
            re, im = _floats(tokens[2:], no)
            if not (1 <= m <= nb and 1 <= n <= nb):
                raise SchemaError(f"line {no}: band index out of range 1..{nb}")
            if seen[m - 1, n - 1]:
                raise SchemaError(f"line {no}: duplicate Hamiltonian entry m={m}, n={n}")
            seen[m - 1, n - 1] = True
            h_r[ir, m - 1, n - 1] = complex(re, im)
        seen[:] = False
        for _ in range(nb * nb):
            line, no = reader.next_content(f"position block for R index {ir + 1}")
            tokens = line.split()
            if len(tokens) != 8:
                raise SchemaError(
                    f"line {no}: expected 'm n Re_x Im_x Re_y Im_y Re_z Im_z' (8 fields)")
            m, n = _ints(" ".join(tokens[:2]), no, 2)
            vals = _floats(tokens[2:], no)
            if not (1 <= m <= nb and 1 <= n <= nb):
                raise SchemaError(f"line {no}: band index out of range 1..{nb}")
            if seen[m - 1, n - 1]:
                raise SchemaError(f"line {no}: duplicate position entry m={m}, n={n}")
            seen[m - 1, n - 1] = True
            for c in range(3):
                r_r[ir, c, m - 1, n - 1] = complex(vals[2 * c], vals[2 * c + 1])
    if not reader.rest_is_blank():
        raise SchemaError(f"trailing content after the declared records "
                          f"(line {reader.pos + 1})")
    if len({tuple(r) for r in rpoints}) != nr:
        raise SchemaError("duplicate R point blocks")

    model = WannierModel(num_bands=nb, rpoints=rpoints, degeneracies=degeneracies,
                         h_r=h_r, r_r=r_r, lattice_vectors=lattice,
                         comment=comment.strip())
    _check_h0_hermitian(model)
    origin = np.flatnonzero((rpoints == 0).all(axis=1))
    if origin.size:
        diag = np.einsum("cnn->cn", r_r[origin[0]])
        if np.abs(diag.imag).max() > DIAG_POSITION_TOL:
            raise ValidationError("diagonal position elements at R=0 must be real")
    return model


def wannier_centers(model: WannierModel) -> np.ndarray:
    """Diagonal of the position blocks at R=0, shape (3, N), Angstrom."""
    if model.r_r is None:
        raise MissingPositions("model carries no position matrices")
    origin = np.flatnonzero((model.rpoints == 0).all(axis=1))
    if not origin.size:
        raise SchemaError("model has no R=(0,0,0) block")
    return np.real(np.einsum("cnn->cn", model.r_r[origin[0]]))


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_hr(model: WannierModel) -> str:
    """Canonical hr serialization: bit-stable, 12 significant digits."""
    out = [model.comment or "valleysim hr file"]
    out.append(f"{model.num_bands:12d}")
    out.append(f"{len(model.rpoints):12d}")
    degs = [f"{d:5d}" for d in model.degeneracies]
    for i in range(0, len(degs), PER_LINE_DEGENERACIES):
        out.append("".join(degs[i:i + PER_LINE_DEGENERACIES]))
    for ir, r in enumerate(model.rpoints):
        for n in range(model.num_bands):
            for m in range(model.num_bands):
                h = model.h_r[ir, m, n]
                out.append(f"{r[0]:5d}{r[1]:5d}{r[2]:5d}{m + 1:5d}{n + 1:5d} "
                           f"{_fmt(h.real):>20} {_fmt(h.imag):>20}")
    return "\n".join(out) + "\n"


def write_tb(model: WannierModel) -> str:
    """Canonical tb serialization (requires positions and lattice vectors)."""
    if model.r_r is None:
        raise MissingPositions("cannot write tb format without position matrices")
    if model.lattice_vectors is None:
        raise MissingPositions("cannot write tb format without lattice vectors")
    out = [model.comment or "valleysim tb file"]
    for vec in model.lattice_vectors:
        out.append(" ".join(f"{_fmt(v):>20}" for v in vec))
    out.append(f"{model.num_bands:12d}")
    out.append(f"{len(model.rpoints):12d}")
    degs = [f"{d:5d}" for d in model.degeneracies]
    for i in range(0, len(degs), PER_LINE_DEGENERACIES):
        out.append("".join(degs[i:i + PER_LINE_DEGENERACIES]))
    for ir, r in enumerate(model.rpoints):
        out.append("")
        out.append(f"{r[0]:5d}{r[1]:5d}{r[2]:5d}")
        for n in range(model.num_bands):
            for m in range(model.num_bands):
                h = model.h_r[ir, m, n]
                out.append(f"{m + 1:5d}{n + 1:5d} {_fmt(h.real):>20} {_fmt(h.imag):>20}")
        for n in range(model.num_bands):
            for m in range(model.num_bands):
                vals = [model.r_r[ir, c, m, n] for c in range(3)]
                comps = " ".join(f"{_fmt(v.real):>20} {_fmt(v.imag):>20}" for v in vals)
                out.append(f"{m + 1:5d}{n + 1:5d} {comps}")
    return "\n".join(out) + "\n"

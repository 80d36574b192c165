"""ASCII PLY and XYZ/CSV point cloud files."""

from __future__ import annotations

import os
import re

import numpy as np

from .core import PointCloud

LOAD_NORMAL_TOL = 1e-3


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnsupportedPly(ValueError):
    pass


def _fmt(x: float) -> str:
    return "%.17g" % x


def _finish(rows: np.ndarray, has_normals: bool, first_line: int) -> PointCloud:
    pts = rows[:, :3]
    normals = None
    if has_normals:
        normals = rows[:, 3:6]
        norms = np.linalg.norm(normals, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > LOAD_NORMAL_TOL)
        if bad.size:
            raise ParseError(f"normal has length {norms[bad[0]]:.6g}, not unit", first_line + int(bad[0]))
        normals = normals / norms[:, None]
    if not np.all(np.isfinite(rows)):
        raise ParseError("non-finite coordinate")
    return PointCloud(pts, normals)


def write_ply(path, cloud: PointCloud) -> None:
    """Write an ASCII PLY with a single ``vertex`` element (doubles, 17 significant digits)."""
    names = ["x", "y", "z"] + (["nx", "ny", "nz"] if cloud.has_normals else [])
    header = ["ply", "format ascii 1.0", f"element vertex {len(cloud)}"]
    header += [f"property double {n}" for n in names]
    header.append("end_header")
    rows = cloud.points if not cloud.has_normals else np.hstack([cloud.points, cloud.normals])
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(header) + "\n")
        for row in rows:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def read_ply(path) -> PointCloud:
    """Read an ASCII PLY containing only a ``vertex`` element.

    Vertex properties other than ``x y z nx ny nz`` are ignored. Normals within
    1e-3 of unit length are re-normalised, others are rejected.

    Raises
    ------
    UnsupportedPly
        Binary encodings, list properties or any element besides ``vertex``.
    ParseError
        Malformed header or data, with the offending line number.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", 1)
    count = None
    props: list[str] = []
    element = None
    body_start = None
    for i, raw in enumerate(lines[1:], start=2):
        tok = raw.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise UnsupportedPly(f"only ascii PLY is supported, got {' '.join(tok[1:])}")
        elif tok[0] == "element":
            if len(tok) != 3:
                raise ParseError("malformed element line", i)
            element = tok[1]
            if element != "vertex":
                raise UnsupportedPly(f"unsupported element {element!r}")
            try:
                count = int(tok[2])
            except ValueError:
                raise ParseError(f"bad vertex count {tok[2]!r}", i) from None
        elif tok[0] == "property":
            if element != "vertex":
                raise ParseError("property outside vertex element", i)
            if len(tok) >= 2 and tok[1] == "list":
                raise UnsupportedPly("list properties are not supported")
            if len(tok) != 3:
                raise ParseError("malformed property line", i)
            props.append(tok[2])
        elif tok[0] == "end_header":
            body_start = i
            break
        else:
            raise ParseError(f"unexpected header keyword {tok[0]!r}", i)
    if body_start is None:
        raise ParseError("missing end_header")
    if count is None:
        raise ParseError("no vertex element declared")
    for name in ("x", "y", "z"):
        if name not in props:
            raise ParseError(f"vertex property {name!r} missing")
    has_normals = all(n in props for n in ("nx", "ny", "nz"))
    cols = [props.index(n) for n in (["x", "y", "z"] + (["nx", "ny", "nz"] if has_normals else []))]
    rows = np.empty((count, len(cols)))
    data = lines[body_start:]
    k = 0
    for offset, raw in enumerate(data):
        lineno = body_start + 1 + offset
        tok = raw.split()
        if not tok:
            continue
        if k >= count:
            raise ParseError("more vertex rows than declared", lineno)
        if len(tok) != len(props):
            raise ParseError(f"expected {len(props)} values, got {len(tok)}", lineno)
        try:
            rows[k] = [float(tok[c]) for c in cols]
        except ValueError:
            raise ParseError(f"non-numeric value in {raw.strip()!r}", lineno) from None
        k += 1
    if k != count:
        raise ParseError(f"expected {count} vertex rows, found {k}")
    return _finish(rows, has_normals, body_start + 1)


def write_xyz(path, cloud: PointCloud, delimiter: str = " ") -> None:
    rows = cloud.points if not cloud.has_normals else np.hstack([cloud.points, cloud.normals])
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in rows:
            fh.write(delimiter.join(_fmt(v) for v in row) + "\n")


_SPLIT = re.compile(r"[,\s]+")


def read_xyz(path) -> PointCloud:
    """Whitespace- or comma-separated rows of 3 (points) or 6 (points and normals) numbers.

    Blank lines and lines starting with ``#`` are skipped.
    """
    rows, width, first = [], None, None
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            tok = [t for t in _SPLIT.split(s) if t]
            if len(tok) not in (3, 6):
                raise ParseError(f"expected 3 or 6 columns, got {len(tok)}", lineno)
            if width is None:
                width, first = len(tok), lineno
            elif len(tok) != width:
                raise ParseError(f"column count changed from {width} to {len(tok)}", lineno)
            try:
                rows.append([float(t) for t in tok])
            except ValueError:
                raise ParseError(f"non-numeric value in {s!r}", lineno) from None
    if not rows:
        raise ParseError("no points found")
    return _finish(np.array(rows), width == 6, first)


def read_cloud(path) -> PointCloud:
    """Dispatch on extension: ``.ply`` or anything else as XYZ/CSV."""
    if os.fspath(path).lower().endswith(".ply"):
        return read_ply(path)
    return read_xyz(path)

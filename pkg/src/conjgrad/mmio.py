"""Matrix Market and plain-text vector I/O, plus the JSON run report.

Supported Matrix Market headers::

    %%MatrixMarket matrix coordinate real general|symmetric
    %%MatrixMarket matrix array      real general|symmetric

Coordinate files load as CSR, array files as dense. Integer, pattern and
complex fields are rejected.

Report JSON keys, in this order::

    n, iterations, stop_reason, residual_norms, alphas, betas, tol_rel[, invariants]

with each invariant written as ``{name, violation, threshold, pass, status}``.
Floats are written with 17 significant digits; non-finite floats as null.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DimensionError, InvalidArgument, IoError, ParseError, UnsupportedFormat
from .linalg import DenseMatrix, SparseMatrixCSR, as_vector, check_symmetry

REPORT_KEYS = ("n", "iterations", "stop_reason", "residual_norms", "alphas", "betas", "tol_rel")
INVARIANT_KEYS = ("name", "violation", "threshold", "pass", "status")


def _read_lines(path):
    try:
        with open(path, "r", encoding="ascii") as fh:
            return fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="ascii")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _float(token, lineno):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", lineno)
    return value


def _int(token, lineno):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"not an integer: {token!r}", lineno) from None


def parse_header(line: str, lineno: int = 1):
    """Return ``(format, symmetry)`` from a ``%%MatrixMarket`` banner."""
    parts = line.strip().split()
    if not parts or parts[0].lower() != "%%matrixmarket":
        raise UnsupportedFormat(f"line {lineno}: missing %%MatrixMarket banner")
    if len(parts) != 5:
        raise UnsupportedFormat(f"line {lineno}: banner needs 4 fields, got {len(parts) - 1}")
    obj, fmt, fld, sym = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise UnsupportedFormat(f"line {lineno}: object {obj!r} not supported")
    if fmt not in ("coordinate", "array"):
        raise UnsupportedFormat(f"line {lineno}: format {fmt!r} not supported")
    if fld != "real":
        raise UnsupportedFormat(f"line {lineno}: field {fld!r} not supported (real only)")
    if sym not in ("general", "symmetric"):
        raise UnsupportedFormat(f"line {lineno}: symmetry {sym!r} not supported")
    return fmt, sym


def _data_lines(lines, start):
    for lineno, line in enumerate(lines[start:], start=start + 1):
        s = line.strip()
        if s and not s.startswith("%"):
            yield lineno, s.split()


def read_matrix_market(path):
    lines = _read_lines(path)
    if not lines:
        raise UnsupportedFormat(f"{path}: empty file")
    fmt, sym = parse_header(lines[0])
    body = _data_lines(lines, 1)
    try:
        lineno, size = next(body)
    except StopIteration:
        raise ParseError("missing size line", len(lines)) from None

    if fmt == "array":
        if len(size) != 2:
            raise ParseError("array size line needs 'rows cols'", lineno)
        m, n = _int(size[0], lineno), _int(size[1], lineno)
        if m != n or n < 1:
            raise ParseError(f"matrix must be square, got {m}x{n}", lineno)
        # column-major; symmetric files list the lower triangle only
        slots = [(i, j) for j in range(n) for i in range(n) if sym == "general" or i >= j]
        a = np.zeros((n, n))
        k = 0
        for lineno, tokens in body:
            if len(tokens) != 1:
                raise ParseError("array entries hold one value per line", lineno)
            if k >= len(slots):
                raise ParseError("more entries than the declared size", lineno)
            i, j = slots[k]
            a[i, j] = _float(tokens[0], lineno)
            if sym == "symmetric":
                a[j, i] = a[i, j]
            k += 1
        if k != len(slots):
            raise ParseError(f"expected {len(slots)} entries, found {k}", len(lines))
        return DenseMatrix(a)

    if len(size) != 3:
        raise ParseError("coordinate size line needs 'rows cols nnz'", lineno)
    m, n, nnz = (_int(t, lineno) for t in size)
    if m != n or n < 1:
        raise ParseError(f"matrix must be square, got {m}x{n}", lineno)
    seen = {}
    count = 0
    for lineno, tokens in body:
        if len(tokens) != 3:
            raise ParseError("coordinate entries need 'row col value'", lineno)
        i, j = _int(tokens[0], lineno), _int(tokens[1], lineno)
        value = _float(tokens[2], lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"index ({i}, {j}) outside {n}x{n}", lineno)
        count += 1
        if count > nnz:
            raise ParseError(f"more than the declared {nnz} entries", lineno)
        targets = [(i - 1, j - 1)]
        if sym == "symmetric" and i != j:
            targets.append((j - 1, i - 1))
        for key in targets:
            if key in seen:
                raise ParseError(f"duplicate entry ({key[0] + 1}, {key[1] + 1}), "
                                 f"first seen on line {seen[key][1]}", lineno)
            seen[key] = (value, lineno)
    if count != nnz:
        raise ParseError(f"declared {nnz} entries, found {count}", len(lines))
    keys = list(seen)
    rows = [k[0] for k in keys]
    cols = [k[1] for k in keys]
    vals = [seen[k][0] for k in keys]
    return SparseMatrixCSR.from_coo(n, rows, cols, vals)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix_market(matrix, path, symmetry: str = "symmetric"):
    """Write ``matrix`` as a coordinate file.

    ``symmetry="symmetric"`` stores only the lower triangle and requires a
    symmetric matrix; ``"general"`` stores every nonzero.
    """
    if symmetry not in ("symmetric", "general"):
        raise InvalidArgument(f"symmetry must be 'symmetric' or 'general', got {symmetry!r}")
    if symmetry == "symmetric" and not check_symmetry(matrix):
        raise InvalidArgument("matrix is not symmetric; write it with symmetry='general'")
    a = matrix.to_dense()
    n = a.shape[0]
    rows, cols = np.nonzero(a)
    if symmetry == "symmetric":
        keep = rows >= cols
        rows, cols = rows[keep], cols[keep]
    # column-major order, as most Matrix Market writers emit
    order = np.lexsort((rows, cols))
    out = [f"%%MatrixMarket matrix coordinate real {symmetry}", f"{n} {n} {rows.size}"]
    out += [f"{i + 1} {j + 1} {_fmt(a[i, j])}" for i, j in zip(rows[order], cols[order])]
    _write_text(path, "\n".join(out) + "\n")


def read_vector(path) -> np.ndarray:
    values = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        values.append(_float(s, lineno))
    if not values:
        raise ParseError("vector file holds no values")
    return as_vector(values)


def write_vector(v, path):
    v = np.asarray(v, dtype=np.float64)
    _write_text(path, "".join(_fmt(x) + "\n" for x in v))


def _json_value(value) -> str:
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt(value) if math.isfinite(value) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = (f"{json.dumps(k)}: {_json_value(v)}" for k, v in value.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps_report(doc: dict) -> str:
    """Serialise a report dict, one top-level key per line, keys in insertion order."""
    lines = [f"  {json.dumps(k)}: {_json_value(v)}" for k, v in doc.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def report_dict(report, invariants=None) -> dict:
    doc = {
        "n": report.n,
        "iterations": report.iterations,
        "stop_reason": report.stop_reason.value,
        "residual_norms": [float(x) for x in report.residual_norms],
        "alphas": [float(x) for x in report.alphas],
        "betas": [float(x) for x in report.betas],
        "tol_rel": float(report.tol_rel),
    }
    if invariants is not None:
        doc["invariants"] = [
            {"name": c.name, "violation": c.violation, "threshold": c.threshold,
             "pass": c.status != "fail", "status": c.status}
            for c in invariants.checks
        ]
    return doc


def write_report(report, invariants, path):
    """``invariants`` may be None; the key is then omitted."""
    _write_text(path, dumps_report(report_dict(report, invariants)))


def read_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="ascii"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc


def check_dimensions(matrix, vector, what="rhs"):
    if matrix.n != vector.size:
        raise DimensionError(f"matrix is {matrix.n}x{matrix.n} but {what} has length {vector.size}")

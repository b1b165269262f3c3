"""Bit-exact expansion files.

Text format with magic header ``KLGP1``; every float is written as C99 hex
(`float.hex()`), so save -> load round-trips are exact to the last bit and
files are stable across platforms.  Writes go to a temporary file in the
target directory followed by an atomic rename, so readers never observe a
partial file.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .kl1d import KLExpansion
from .kl2d import KLExpansion2D

__all__ = ["save_expansion", "load_expansion", "atomic_write_text"]

MAGIC = "KLGP1"


def atomic_write_text(path, text):
    """Write text to path via a temp file + rename; no partial outputs."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _hex_row(values):
    return " ".join(float(v).hex() for v in values)


def save_expansion(expansion, path):
    """Serialize a 1D or 2D expansion to ``path`` (atomic)."""
    lines = [MAGIC]
    if isinstance(expansion, KLExpansion):
        a, b = expansion.domain
        lines.append("dim 1")
        lines.append(f"algorithm {expansion.algorithm}")
        lines.append(f"domain {float(a).hex()} {float(b).hex()}")
        lines.append(f"n {expansion.n}")
        lines.append(f"m {expansion.m}")
        lines.append(f"eigenvalues {expansion.m}")
        lines.extend(float(v).hex() for v in expansion.eigenvalues)
        lines.append(f"coefficients {expansion.n} {expansion.m}")
        lines.extend(_hex_row(row) for row in expansion.coefficients)
    elif isinstance(expansion, KLExpansion2D):
        (a, b), (c, d) = expansion.domain
        nx, ny = expansion.orders
        lines.append("dim 2")
        lines.append(f"algorithm {expansion.algorithm}")
        lines.append("domain " + " ".join(float(v).hex() for v in (a, b, c, d)))
        lines.append(f"orders {nx} {ny}")
        lines.append(f"m {expansion.m}")
        lines.append(f"eigenvalues {expansion.m}")
        lines.extend(float(v).hex() for v in expansion.eigenvalues)
        lines.append(f"coefficients {expansion.m} {nx} {ny}")
        for block in expansion.coefficients:
            lines.extend(_hex_row(row) for row in block)
    else:
        raise TypeError(f"not a KL expansion: {type(expansion).__name__}")
    lines.append("end")
    atomic_write_text(path, "\n".join(lines) + "\n")


class _Reader:
    def __init__(self, path):
        with open(path, "r") as handle:
            self.lines = [line.rstrip("\n") for line in handle]
        self.pos = 0
        self.path = path

    def next(self):
        if self.pos >= len(self.lines):
            raise ValueError(f"{self.path}: truncated expansion file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect(self, keyword):
        line = self.next()
        parts = line.split()
        if not parts or parts[0] != keyword:
            raise ValueError(
                f"{self.path}: expected {keyword!r}, found {line!r}"
            )
        return parts[1:]

    def floats(self, count):
        out = np.empty(count)
        for i in range(count):
            out[i] = float.fromhex(self.next())
        return out

    def float_rows(self, rows, cols):
        out = np.empty((rows, cols))
        for i in range(rows):
            parts = self.next().split()
            if len(parts) != cols:
                raise ValueError(
                    f"{self.path}: expected {cols} values per row, got {len(parts)}"
                )
            out[i] = [float.fromhex(p) for p in parts]
        return out


def load_expansion(path):
    """Load an expansion written by :func:`save_expansion`."""
    reader = _Reader(path)
    if reader.next() != MAGIC:
        raise ValueError(f"{path}: not a {MAGIC} expansion file")
    dim = int(reader.expect("dim")[0])
    algorithm = reader.expect("algorithm")[0]
    if dim == 1:
        a, b = (float.fromhex(v) for v in reader.expect("domain"))
        n = int(reader.expect("n")[0])
        m = int(reader.expect("m")[0])
        count = int(reader.expect("eigenvalues")[0])
        if count != m:
            raise ValueError(f"{path}: eigenvalue count {count} != m {m}")
        eigenvalues = reader.floats(m)
        rows, cols = (int(v) for v in reader.expect("coefficients"))
        if (rows, cols) != (n, m):
            raise ValueError(f"{path}: coefficient block {rows}x{cols}, expected {n}x{m}")
        coefficients = reader.float_rows(n, m)
        if reader.next() != "end":
            raise ValueError(f"{path}: missing end marker")
        return KLExpansion(domain=(a, b), n=n, eigenvalues=eigenvalues,
                           coefficients=coefficients, algorithm=algorithm)
    if dim == 2:
        a, b, c, d = (float.fromhex(v) for v in reader.expect("domain"))
        nx, ny = (int(v) for v in reader.expect("orders"))
        m = int(reader.expect("m")[0])
        count = int(reader.expect("eigenvalues")[0])
        if count != m:
            raise ValueError(f"{path}: eigenvalue count {count} != m {m}")
        eigenvalues = reader.floats(m)
        mm, rx, ry = (int(v) for v in reader.expect("coefficients"))
        if (mm, rx, ry) != (m, nx, ny):
            raise ValueError(f"{path}: coefficient block {mm}x{rx}x{ry}")
        coefficients = reader.float_rows(m * nx, ny).reshape(m, nx, ny)
        if reader.next() != "end":
            raise ValueError(f"{path}: missing end marker")
        return KLExpansion2D(domain=((a, b), (c, d)), orders=(nx, ny),
                             eigenvalues=eigenvalues, coefficients=coefficients,
                             algorithm=algorithm)
    raise ValueError(f"{path}: unsupported dimension {dim}")

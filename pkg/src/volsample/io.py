"""Plain-text matrix and label file parsing.

Matrix files hold one row per line, comma-separated decimal reals; ``#``
starts a comment.  Label files hold either one value per line or a single
comma-separated line.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import MatrixParseError


def load_matrix(path) -> np.ndarray:
    """Parse a rectangular matrix; failures report 1-based line and column."""
    rows: list[tuple[int, list[float]]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            values = []
            for colno, fieldtext in enumerate(text.split(","), start=1):
                fieldtext = fieldtext.strip()
                if not fieldtext:
                    raise MatrixParseError(path, lineno, colno, "empty field")
                try:
                    values.append(float(fieldtext))
                except ValueError:
                    raise MatrixParseError(
                        path, lineno, colno, f"not a number: {fieldtext!r}"
                    ) from None
            rows.append((lineno, values))
    if not rows:
        raise MatrixParseError(path, 1, 1, "no data rows")
    width = len(rows[0][1])
    for lineno, values in rows:
        if len(values) != width:
            raise MatrixParseError(
                path, lineno, len(values), f"expected {width} fields, got {len(values)}"
            )
    return np.array([values for _, values in rows], dtype=float)


def load_labels(path) -> np.ndarray:
    """Parse a label vector (column of lines or one comma-separated line)."""
    matrix = load_matrix(path)
    if matrix.shape[0] == 1 or matrix.shape[1] == 1:
        return matrix.reshape(-1)
    raise MatrixParseError(
        path, 1, 1, "labels must be one value per line or a single comma-separated line"
    )


def file_digest(path) -> str:
    """Hex SHA-256 of the file contents."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()

"""Plain-text checkpoint format for fitted models.

Models are saved as named CSV blocks. Each block starts with a header line
`name rows cols`, followed by `rows` comma-separated lines. Values use
full-precision repr so a save/load round trip is exact.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError


def write_blocks(path, blocks) -> None:
    """Write (name, matrix) pairs as consecutive headed CSV blocks."""
    with open(path, "w", encoding="utf-8") as fh:
        for name, arr in blocks:
            arr = np.atleast_2d(np.asarray(arr, dtype=float))
            fh.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
            for row in arr:
                fh.write(",".join(repr(v) for v in row) + "\n")


def read_blocks(path) -> dict[str, np.ndarray]:
    """Read headed CSV blocks back into a name -> matrix mapping."""
    blocks: dict[str, np.ndarray] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    pos = 0
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        parts = lines[pos].split()
        if len(parts) != 3:
            raise DataError(f"{path}: line {pos + 1}: expected 'name rows cols'")
        name, rows, cols = parts[0], int(parts[1]), int(parts[2])
        data = []
        for r in range(rows):
            pos += 1
            if pos >= len(lines):
                raise DataError(f"{path}: block {name} truncated")
            data.append([float(c) for c in lines[pos].split(",")])
            if len(data[-1]) != cols:
                raise DataError(f"{path}: line {pos + 1}: expected {cols} columns")
        blocks[name] = np.asarray(data)
        pos += 1
    return blocks

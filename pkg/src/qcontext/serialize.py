"""JSON encodings for matrices, channels, contexts and POVMs.

Matrix: ``{"rows": n, "cols": m, "data": [[[re, im], ...], ...]}``
(row-major, outer list = rows). Python's float repr round-trips every
finite double, so ``decode_matrix(encode_matrix(A))`` is bit-exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError


def encode_matrix(A) -> dict:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[[float(z.real), float(z.imag)] for z in row] for row in A],
    }


def decode_matrix(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
        if rows < 1 or cols < 1 or len(data) != rows:
            raise ParseError(f"matrix declares {rows}x{cols} but has {len(data)} rows")
        out = np.empty((rows, cols), dtype=np.complex128)
        for r, row in enumerate(data):
            if len(row) != cols:
                raise ParseError(f"row {r} has {len(row)} entries, expected {cols}")
            for c, entry in enumerate(row):
                re, im = entry
                out[r, c] = complex(float(re), float(im))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ParseError("matrix entries must be finite")
    return out


def encode_channel(channel) -> dict:
    return {"dim": channel.dim, "branches": [encode_matrix(M) for M in channel.branches]}


def decode_branches(obj) -> list:
    try:
        dim = int(obj["dim"])
        branches = [decode_matrix(m) for m in obj["branches"]]
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed channel: {exc}") from exc
    if not branches:
        raise ParseError("channel has no branches")
    for M in branches:
        if M.shape != (dim, dim):
            raise ParseError(f"branch shape {M.shape} does not match dim {dim}")
    return branches


def encode_context(context) -> dict:
    return {
        "dim": context.dim,
        "basis": [encode_matrix(context.basis[:, i].reshape(-1, 1)) for i in range(context.dim)],
    }


def decode_basis(obj) -> np.ndarray:
    """Decode a context file into a matrix whose columns are the basis vectors."""
    try:
        dim = int(obj["dim"])
        vectors = [decode_matrix(v).reshape(-1) for v in obj["basis"]]
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed context: {exc}") from exc
    if len(vectors) != dim or any(v.size != dim for v in vectors):
        raise ParseError(f"context must list {dim} vectors of length {dim}")
    return np.column_stack(vectors)


def encode_povm(povm) -> dict:
    return {
        "dim": povm.dim,
        "outcomes": list(povm.outcomes),
        "effects": [encode_matrix(E) for E in povm.effects],
    }


def decode_povm_parts(obj):
    try:
        dim = int(obj["dim"])
        outcomes = [str(o) for o in obj["outcomes"]]
        effects = [decode_matrix(m) for m in obj["effects"]]
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed povm: {exc}") from exc
    if len(outcomes) != len(effects):
        raise ParseError("outcomes and effects differ in length")
    for E in effects:
        if E.shape != (dim, dim):
            raise ParseError(f"effect shape {E.shape} does not match dim {dim}")
    return outcomes, effects


def encode_joint(joint) -> dict:
    return {
        "dim": joint.dim,
        "outcomes_x": list(joint.outcomes_x),
        "outcomes_y": list(joint.outcomes_y),
        "effects": [
            [encode_matrix(joint.grid[(x, y)]) for y in joint.outcomes_y] for x in joint.outcomes_x
        ],
    }


def decode_joint_parts(obj):
    try:
        dim = int(obj["dim"])
        xs = [str(o) for o in obj["outcomes_x"]]
        ys = [str(o) for o in obj["outcomes_y"]]
        rows = obj["effects"]
        if len(rows) != len(xs) or any(len(row) != len(ys) for row in rows):
            raise ParseError("effects grid does not match outcome labels")
        grid = {(x, y): decode_matrix(rows[a][b]) for a, x in enumerate(xs) for b, y in enumerate(ys)}
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed joint povm: {exc}") from exc
    for E in grid.values():
        if E.shape != (dim, dim):
            raise ParseError(f"effect shape {E.shape} does not match dim {dim}")
    return xs, ys, grid


def load_json(path) -> dict:
    try:
        with open(Path(path), encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc


def dump_json(obj, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")

"""Plain-text edge-list format for signed graphs and weight layers.

Layout::

    n m
    i j s
    ...

The header gives the node count ``n`` and the number of edge lines ``m``.
Each edge line holds two 0-based node indices and a value. For signed
graphs the value must be ``-1`` or ``+1``; for weight layers it is any real
in ``[-1, 1]``. Pairs not listed are absent (sign 0 / weight 0).

Parsing rules: fields are whitespace separated, blank lines and lines whose
first non-blank character is ``#`` are ignored, an edge may be given as
``i j`` or ``j i`` but only once, and self-loops are rejected. Weights are
written with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .signed import LayerWeights, SignPattern

__all__ = [
    "GraphFormatError",
    "parse_signed_graph",
    "parse_weights",
    "format_signed_graph",
    "format_weights",
    "read_signed_graph",
    "read_weights",
    "write_signed_graph",
    "write_weights",
]


class GraphFormatError(ValueError):
    pass


def _parse(text: str) -> tuple[int, list[tuple[int, int, str]]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            rows.append((lineno, line.split()))
    if not rows:
        raise GraphFormatError("missing 'n m' header")
    lineno, head = rows[0]
    if len(head) != 2:
        raise GraphFormatError(f"line {lineno}: header must be 'n m', got {' '.join(head)!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphFormatError(f"line {lineno}: header must hold two integers") from None
    if n < 1 or m < 0:
        raise GraphFormatError(f"line {lineno}: invalid header n={n} m={m}")
    body = rows[1:]
    if len(body) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(body)}")
    seen = set()
    edges = []
    for lineno, fields in body:
        if len(fields) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'i j s', got {' '.join(fields)!r}")
        try:
            i, j = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: node indices must be integers") from None
        if not (0 <= i < n and 0 <= j < n):
            raise GraphFormatError(f"line {lineno}: node index out of range for n={n}")
        if i == j:
            raise GraphFormatError(f"line {lineno}: self-loop on node {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphFormatError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        edges.append((i, j, fields[2]))
    return n, edges


def parse_signed_graph(text: str) -> SignPattern:
    n, edges = _parse(text)
    s = np.zeros((n, n), dtype=np.int8)
    for i, j, v in edges:
        if v not in ("1", "+1", "-1"):
            raise GraphFormatError(f"edge ({i}, {j}): sign must be -1 or +1, got {v!r}")
        s[i, j] = s[j, i] = int(v)
    return SignPattern(s)


def parse_weights(text: str) -> LayerWeights:
    n, edges = _parse(text)
    w = np.zeros((n, n))
    for i, j, v in edges:
        try:
            x = float(v)
        except ValueError:
            raise GraphFormatError(f"edge ({i}, {j}): weight {v!r} is not a number") from None
        if not -1 <= x <= 1:
            raise GraphFormatError(f"edge ({i}, {j}): weight {x} outside [-1, 1]")
        w[i, j] = w[j, i] = x
    return LayerWeights(w)


def _format(a: np.ndarray, fmt) -> str:
    iu, ju = np.triu_indices(a.shape[0], 1)
    keep = a[iu, ju] != 0
    lines = [f"{a.shape[0]} {int(keep.sum())}"]
    lines += [f"{i} {j} {fmt(a[i, j])}" for i, j in zip(iu[keep], ju[keep])]
    return "\n".join(lines) + "\n"


def format_signed_graph(s: SignPattern) -> str:
    return _format(s.s, lambda v: f"{int(v):+d}")


def format_weights(w: LayerWeights) -> str:
    return _format(w.w, lambda v: f"{float(v):.17g}")


def read_signed_graph(path) -> SignPattern:
    return parse_signed_graph(Path(path).read_text())


def read_weights(path) -> LayerWeights:
    return parse_weights(Path(path).read_text())


def write_signed_graph(s: SignPattern, path) -> None:
    Path(path).write_text(format_signed_graph(s))


def write_weights(w: LayerWeights, path) -> None:
    Path(path).write_text(format_weights(w))

"""Result files: CSV tables and grayscale heatmaps of ``p_hb``.

Heatmaps put ``beta1`` on the horizontal axis (ascending left to right)
and ``beta2`` on the vertical axis (descending top to bottom, so the
origin sits bottom-left). A pixel is ``round(255 * p_hb)`` with halves
rounded away from zero: black means balance was never reached, white
means it always was.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .sweep import CellEstimate

__all__ = [
    "CSV_HEADER",
    "ResultsIOError",
    "IncompleteGridError",
    "HeatmapImage",
    "format_results_csv",
    "write_results_csv",
    "read_results_csv",
    "pixel_value",
    "heatmap_image",
    "render_heatmap",
    "render_montage",
    "read_pgm",
]

CSV_HEADER = ("beta1", "beta2", "n", "trials", "balanced", "jammed", "undecided", "p_hb", "std_err")


class ResultsIOError(OSError):
    pass


class IncompleteGridError(ValueError):
    def __init__(self, n: int, missing):
        self.missing = list(missing)
        pairs = ", ".join(f"({b1:g}, {b2:g})" for b1, b2 in self.missing)
        super().__init__(f"grid for n={n} is missing (beta1, beta2) = {pairs}")


def _g(x: float) -> str:
    return f"{x:.6g}"


def format_results_csv(cells: Sequence[CellEstimate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in cells:
        w.writerow(
            [_g(c.beta1), _g(c.beta2), c.n, c.trials, c.balanced, c.jammed, c.undecided, _g(c.p_hb), _g(c.std_err)]
        )
    return buf.getvalue()


def write_results_csv(cells: Sequence[CellEstimate], path) -> None:
    path = Path(path)
    try:
        path.write_bytes(format_results_csv(cells).encode("ascii"))
    except OSError as e:
        raise ResultsIOError(f"cannot write results to {path}: {e.strerror or e}") from e


def read_results_csv(path) -> list[CellEstimate]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ResultsIOError(f"cannot read results from {path}: {e.strerror or e}") from e
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
    cells = []
    for lineno, r in enumerate(rows[1:], 2):
        if len(r) != len(CSV_HEADER):
            raise ValueError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(r)}")
        try:
            cells.append(
                CellEstimate(
                    beta1=float(r[0]),
                    beta2=float(r[1]),
                    n=int(r[2]),
                    trials=int(r[3]),
                    balanced=int(r[4]),
                    jammed=int(r[5]),
                    undecided=int(r[6]),
                    p_hb=float(r[7]),
                    std_err=float(r[8]),
                )
            )
        except ValueError as e:
            raise ValueError(f"{path}:{lineno}: {e}") from None
    return cells


def pixel_value(p_hb: float) -> int:
    if not 0.0 <= p_hb <= 1.0:
        raise ValueError(f"p_hb must lie in [0, 1], got {p_hb}")
    return int(math.floor(255.0 * p_hb + 0.5))


@dataclass(frozen=True)
class HeatmapImage:
    """Row-major 8-bit grayscale raster of one size's grid.

    Row 0 is the largest ``beta2``; column 0 the smallest ``beta1``.
    """

    n: int
    beta1_values: tuple[float, ...]
    beta2_values: tuple[float, ...]
    pixels: np.ndarray

    @property
    def width(self) -> int:
        return len(self.beta1_values)

    @property
    def height(self) -> int:
        return len(self.beta2_values)


def heatmap_image(cells: Sequence[CellEstimate], n: int) -> HeatmapImage:
    sel = [c for c in cells if c.n == n]
    if not sel:
        raise IncompleteGridError(n, [])
    b1 = sorted({c.beta1 for c in sel})
    b2 = sorted({c.beta2 for c in sel})
    grid: dict[tuple[float, float], CellEstimate] = {}
    for c in sel:
        if (c.beta1, c.beta2) in grid:
            raise ValueError(f"duplicate cell (beta1={c.beta1:g}, beta2={c.beta2:g}) for n={n}")
        grid[c.beta1, c.beta2] = c
    missing = [(x, y) for x in b1 for y in b2 if (x, y) not in grid]
    if missing:
        raise IncompleteGridError(n, missing)
    px = np.empty((len(b2), len(b1)), dtype=np.uint8)
    for row, y in enumerate(reversed(b2)):
        for col, x in enumerate(b1):
            px[row, col] = pixel_value(grid[x, y].p_hb)
    px.setflags(write=False)
    return HeatmapImage(n=n, beta1_values=tuple(b1), beta2_values=tuple(b2), pixels=px)


def _pgm_bytes(px: np.ndarray, comments: Sequence[str] = ()) -> bytes:
    head = "P5\n" + "".join(f"# {c}\n" for c in comments) + f"{px.shape[1]} {px.shape[0]}\n255\n"
    return head.encode("ascii") + np.ascontiguousarray(px, dtype=np.uint8).tobytes()


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5, maxval <= 255) PGM into a ``(height, width)`` array."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    pos += 1  # single whitespace after maxval
    px = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return px.reshape(height, width)


def _svg(img: HeatmapImage, cell: int = 40) -> str:
    left, top, right, bottom = 70, 40, 20, 60
    w = left + img.width * cell + right
    h = top + img.height * cell + bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<title>{escape(f"P_HB, n={img.n}")}</title>',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    for row in range(img.height):
        for col in range(img.width):
            v = int(img.pixels[row, col])
            parts.append(
                f'<rect x="{left + col * cell}" y="{top + row * cell}" width="{cell}" height="{cell}" '
                f'fill="rgb({v},{v},{v})"/>'
            )
    parts.append(
        f'<rect x="{left}" y="{top}" width="{img.width * cell}" height="{img.height * cell}" '
        'fill="none" stroke="black"/>'
    )
    base = top + img.height * cell
    for col, b in enumerate(img.beta1_values):
        x = left + col * cell + cell / 2
        parts.append(f'<line x1="{x}" y1="{base}" x2="{x}" y2="{base + 5}" stroke="black"/>')
        parts.append(f'<text x="{x}" y="{base + 18}" font-size="11" text-anchor="middle">{b:g}</text>')
    for row, b in enumerate(reversed(img.beta2_values)):
        y = top + row * cell + cell / 2
        parts.append(f'<line x1="{left - 5}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{y + 4}" font-size="11" text-anchor="end">{b:g}</text>')
    parts.append(
        f'<text x="{left + img.width * cell / 2}" y="{h - 15}" font-size="14" text-anchor="middle">β1</text>'
    )
    parts.append(
        f'<text x="18" y="{top + img.height * cell / 2}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + img.height * cell / 2})">β2</text>'
    )
    parts.append(f'<text x="{left}" y="{top - 14}" font-size="14">P_HB, n = {img.n}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _axis_comments(img: HeatmapImage) -> list[str]:
    return [
        f"n={img.n}",
        "columns: beta1 ascending left to right: " + " ".join(f"{b:g}" for b in img.beta1_values),
        "rows: beta2 descending top to bottom: " + " ".join(f"{b:g}" for b in reversed(img.beta2_values)),
        "pixel = round(255 * p_hb)",
    ]


def render_heatmap(cells: Sequence[CellEstimate], n: int, path) -> HeatmapImage:
    """Write the ``p_hb`` grid of size ``n`` as ``path`` (PGM) plus an SVG twin.

    The SVG goes next to the PGM with suffix ``.svg`` and carries axis
    labels and beta ticks.
    """
    img = heatmap_image(cells, n)
    path = Path(path)
    try:
        path.write_bytes(_pgm_bytes(img.pixels, _axis_comments(img)))
        path.with_suffix(".svg").write_text(_svg(img))
    except OSError as e:
        raise ResultsIOError(f"cannot write heatmap to {path}: {e.strerror or e}") from e
    return img


def render_montage(cells: Sequence[CellEstimate], sizes: Sequence[int], path, gap: int = 1) -> np.ndarray:
    """Side-by-side PGM of several sizes, separated by ``gap`` mid-gray columns."""
    imgs = [heatmap_image(cells, n) for n in sizes]
    height = max(i.height for i in imgs)
    cols = []
    for k, img in enumerate(imgs):
        if k:
            cols.append(np.full((height, gap), 128, dtype=np.uint8))
        pad = np.full((height, img.width), 128, dtype=np.uint8)
        pad[height - img.height :, :] = img.pixels
        cols.append(pad)
    px = np.hstack(cols)
    comments = ["sizes left to right: " + " ".join(str(n) for n in sizes)]
    Path(path).write_bytes(_pgm_bytes(px, comments))
    return px

"""Raster and SVG output for brush strokes.

Strokes are opaque, constant-width, round-capped paths. Coverage is the
usual distance-based area estimate: a pixel centre at distance ``d`` from the
centreline gets ``clip(width/2 + 0.5 - d, 0, 1)``.
"""
import math
from xml.sax.saxutils import quoteattr

import numpy as np

from ._validation import check_color_image, check_rgb
from .exceptions import InvalidInput, InvalidParameter

WHITE = (255.0, 255.0, 255.0)
FLATNESS = 0.2


class Canvas:
    """Mutable RGB pixel store, ``pixels`` has shape (height, width, 3)."""

    def __init__(self, width, height, background=WHITE):
        for name, value in (("width", width), ("height", height)):
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise InvalidParameter(f"{name} must be a positive integer, got {value!r}")
        self.background = check_rgb(background, "background")
        self.pixels = np.empty((int(height), int(width), 3), dtype=np.float64)
        self.pixels[...] = self.background

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    def snapshot(self):
        return self.pixels.copy()


def new_canvas(width, height, background=WHITE):
    return Canvas(width, height, background)


def flatten_bezier(ctrl, tolerance=FLATNESS):
    """Adaptive de Casteljau flattening of one cubic segment.

    A piece is emitted once both inner control points lie within
    ``tolerance`` of its chord, which bounds the chordal deviation.
    """
    ctrl = np.asarray(ctrl, dtype=np.float64)
    out = [ctrl[0]]
    stack = [ctrl]
    while stack:
        c = stack.pop()
        chord = c[3] - c[0]
        length = math.hypot(chord[0], chord[1])
        if length > 1e-12:
            dev = max(
                abs(chord[0] * (c[k][1] - c[0][1]) - chord[1] * (c[k][0] - c[0][0])) / length
                for k in (1, 2)
            )
        else:
            dev = max(math.hypot(*(c[k] - c[0])) for k in (1, 2))
        if dev <= tolerance:
            out.append(c[3])
            continue
        ab = 0.5 * (c[0] + c[1])
        bc = 0.5 * (c[1] + c[2])
        cd = 0.5 * (c[2] + c[3])
        abc = 0.5 * (ab + bc)
        bcd = 0.5 * (bc + cd)
        mid = 0.5 * (abc + bcd)
        # right half first so the left half pops next
        stack.append(np.array([mid, bcd, cd, c[3]]))
        stack.append(np.array([c[0], ab, abc, mid]))
    return np.array(out)


def flatten_stroke(stroke, tolerance=FLATNESS):
    parts = [flatten_bezier(seg, tolerance) for seg in stroke.segments]
    return np.concatenate([parts[0]] + [p[1:] for p in parts[1:]])


def _polyline_distance(poly, x0, y0, x1, y1, reach):
    """Distance from pixel centres in [x0, x1) x [y0, y1) to a polyline.

    Only pixels within ``reach`` of a segment get an exact value; the rest
    stay at infinity.
    """
    dist = np.full((y1 - y0, x1 - x0), np.inf)
    ys = np.arange(y0, y1, dtype=np.float64)
    xs = np.arange(x0, x1, dtype=np.float64)
    segments = [(poly[0], poly[0])] if len(poly) == 1 else zip(poly[:-1], poly[1:])
    for a, b in segments:
        bx0 = max(x0, math.floor(min(a[0], b[0]) - reach))
        bx1 = min(x1, math.ceil(max(a[0], b[0]) + reach) + 1)
        by0 = max(y0, math.floor(min(a[1], b[1]) - reach))
        by1 = min(y1, math.ceil(max(a[1], b[1]) + reach) + 1)
        if bx0 >= bx1 or by0 >= by1:
            continue
        px = xs[bx0 - x0:bx1 - x0][None, :] - a[0]
        py = ys[by0 - y0:by1 - y0][:, None] - a[1]
        dx, dy = b[0] - a[0], b[1] - a[1]
        denom = dx * dx + dy * dy
        if denom > 0.0:
            t = np.clip((px * dx + py * dy) / denom, 0.0, 1.0)
            d = np.hypot(px - t * dx, py - t * dy)
        else:
            d = np.hypot(px, py)
        view = dist[by0 - y0:by1 - y0, bx0 - x0:bx1 - x0]
        np.minimum(view, d, out=view)
    return dist


def draw_stroke(canvas, stroke):
    """Paint one stroke over the canvas (opaque, anti-aliased edges)."""
    poly = flatten_stroke(stroke)
    half = 0.5 * stroke.width
    reach = half + 0.5
    x0 = max(0, math.floor(poly[:, 0].min() - reach))
    x1 = min(canvas.width, math.ceil(poly[:, 0].max() + reach) + 1)
    y0 = max(0, math.floor(poly[:, 1].min() - reach))
    y1 = min(canvas.height, math.ceil(poly[:, 1].max() + reach) + 1)
    if x0 >= x1 or y0 >= y1:
        return
    dist = _polyline_distance(poly, x0, y0, x1, y1, reach)
    cover = np.clip(reach - dist, 0.0, 1.0)
    mask = cover > 0.0
    if not mask.any():
        return
    region = canvas.pixels[y0:y1, x0:x1]
    c = cover[mask][:, None]
    color = np.asarray(stroke.color)
    region[mask] = region[mask] * (1.0 - c) + color * c


def mean_cell_distance(a, b, cell):
    """Mean per-pixel RGB Euclidean distance over ``cell = (x0, y0, x1, y1)`` (half-open)."""
    a = check_color_image(a, "a")
    b = check_color_image(b, "b")
    if a.shape != b.shape:
        raise InvalidInput(f"image shapes differ: {a.shape} vs {b.shape}")
    x0, y0, x1, y1 = (int(v) for v in cell)
    height, width = a.shape[:2]
    if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
        raise InvalidInput(f"cell {cell} is empty or outside the {width}x{height} image")
    diff = a[y0:y1, x0:x1] - b[y0:y1, x0:x1]
    return float(np.sqrt(np.sum(diff * diff, axis=-1)).mean())


def cell_distances(a, b, cell_size):
    """Mean RGB distance for every cell of a grid with side ``cell_size``.

    Partial cells at the right and bottom edges are included. Returns
    ``(distances, edges_x, edges_y)`` where cell ``(i, j)`` spans columns
    ``edges_x[j]:edges_x[j+1]`` and rows ``edges_y[i]:edges_y[i+1]``.
    """
    height, width = a.shape[:2]
    edges_x = grid_edges(width, cell_size)
    edges_y = grid_edges(height, cell_size)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    per_pixel = np.sqrt(np.sum(diff * diff, axis=-1))
    sums = np.add.reduceat(np.add.reduceat(per_pixel, edges_y[:-1], axis=0), edges_x[:-1], axis=1)
    counts = np.outer(np.diff(edges_y), np.diff(edges_x))
    return sums / counts, edges_x, edges_y


def grid_edges(size, cell_size):
    """Integer cell boundaries along one axis for real-valued ``cell_size``."""
    n = max(1, math.ceil(size / cell_size - 1e-9))
    edges = np.unique(np.minimum(np.rint(np.arange(n + 1) * cell_size), size).astype(int))
    if edges[-1] != size:
        edges = np.append(edges, size)
    return edges


def _fmt(v):
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _rgb(color):
    r, g, b = (int(np.clip(np.rint(c), 0, 255)) for c in color)
    return f"rgb({r},{g},{b})"


def stroke_path_data(stroke):
    # SVG user space puts pixel centres at half-integers
    segs = stroke.segments + 0.5
    parts = [f"M {_fmt(segs[0, 0, 0])} {_fmt(segs[0, 0, 1])}"]
    for seg in segs:
        parts.append("C " + " ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in seg[1:]))
    return " ".join(parts)


def export_svg(strokes, width, height, background=WHITE):
    """SVG 1.1 document with a background rect and one path per stroke, in order."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="{_rgb(background)}"/>',
    ]
    for stroke in strokes:
        lines.append(
            f"<path d={quoteattr(stroke_path_data(stroke))} fill=\"none\" stroke=\"{_rgb(stroke.color)}\" "
            f'stroke-width="{_fmt(stroke.width)}" stroke-linecap="round" stroke-linejoin="round"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def heatmap(values, vmin=0.0, vmax=1.0):
    """Grey RGB image of a scalar map rescaled from [vmin, vmax] to [0, 255]."""
    scaled = np.clip((np.asarray(values, dtype=np.float64) - vmin) / (vmax - vmin), 0.0, 1.0) * 255.0
    return np.repeat(scaled[..., None], 3, axis=-1)

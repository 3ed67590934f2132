"""Coarse-to-fine multilayer painting driven by tractography."""
import logging
from dataclasses import dataclass

import numpy as np

from ._validation import check_color_image
from .config import StylizationConfig
from .exceptions import InvalidInput
from .imagecore import bilinear_sample, resample, source_to_working, to_greyscale, working_to_source
from .renderer import cell_distances, draw_stroke, new_canvas
from .strokegeom import BrushStroke, tract_to_stroke
from .tensorfield import gradient_orientation_field, structure_tensor
from .tracer import Tract, TracerConfig, trace_bidirectional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StrokeRecord:
    """Provenance of one placed stroke.

    ``seed`` and ``tract`` are in working-image coordinates of the layer;
    ``stroke`` is in canvas (original image) coordinates.
    """

    layer: int
    cell: tuple
    seed: tuple
    tract: Tract
    stroke: BrushStroke
    canvas_points: np.ndarray


def layer_rng(seed, layer_index):
    """Independent PCG64 stream for one layer, derived from the run seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(layer_index)])))


def fisher_yates(items, rng):
    items = list(items)
    for i in range(len(items) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        items[i], items[j] = items[j], items[i]
    return items


def build_field(grey, cfg):
    if cfg.field_kind == "gradient":
        return gradient_orientation_field(grey, cfg.sigma_d)
    return structure_tensor(grey, cfg.sigma_d, cfg.rho)


def _tracer_config(params, cfg, coord_factor):
    cell_working = params.stroke_width / coord_factor
    max_length = params.stroke_length
    if cfg.length_space == "original":
        max_length /= coord_factor
    max_step = cfg.max_step if cfg.max_step is not None else max(cell_working, cfg.min_step)
    initial = min(cfg.initial_step, max_step)
    return TracerConfig(
        max_length=max_length,
        coherence_min=cfg.coherence_min,
        initial_step=initial,
        min_step=min(cfg.min_step, initial),
        max_step=max_step,
        error_tol=cfg.error_tol,
    )


def stylize_layer(original, canvas, params, cfg, rng, layer_index=0):
    """Paint one layer onto ``canvas`` in place and return its stroke records.

    Cells are gated against a snapshot of the canvas taken when the layer
    starts, so the gate does not depend on the (random) drawing order.
    """
    original = check_color_image(original, "original")
    height, width = original.shape[:2]
    if canvas.pixels.shape != original.shape:
        raise InvalidInput(f"canvas shape {canvas.pixels.shape} differs from image {original.shape}")

    factor = params.scale_factor
    working = resample(original, factor, cfg.resize_mode)
    coord_factor = factor if cfg.resize_mode == "resize" else 1.0
    work_h, work_w = working.shape[:2]
    field = build_field(to_greyscale(working), cfg)
    tcfg = _tracer_config(params, cfg, coord_factor)

    dist, edges_x, edges_y = cell_distances(original, canvas.snapshot(), params.stroke_width)
    active = [(int(i), int(j)) for i, j in zip(*np.nonzero(dist > params.color_threshold))]
    order = fisher_yates(active, rng)

    records = []
    skipped = 0
    for row, col in order:
        x_lo, x_hi = edges_x[col], edges_x[col + 1]
        y_lo, y_hi = edges_y[row], edges_y[row + 1]
        if cfg.seed_jitter:
            cx = x_lo - 0.5 + rng.random() * (x_hi - x_lo)
            cy = y_lo - 0.5 + rng.random() * (y_hi - y_lo)
        else:
            cx = 0.5 * (x_lo + x_hi - 1)
            cy = 0.5 * (y_lo + y_hi - 1)
        sx = float(source_to_working(cx, coord_factor, work_w))
        sy = float(source_to_working(cy, coord_factor, work_h))
        sample = field.orientation_at(sx, sy)
        if sample.degenerate or sample.coherence < cfg.coherence_min:
            skipped += 1
            continue
        tract = trace_bidirectional(field, (sx, sy), tcfg, bidirectional=cfg.bidirectional)
        if len(tract) < 2:
            skipped += 1
            continue
        pts = np.column_stack([
            working_to_source(tract.points[:, 0], coord_factor, width),
            working_to_source(tract.points[:, 1], coord_factor, height),
        ])
        mx, my = tract.midpoint()
        color = np.clip(bilinear_sample(working, mx, my), 0.0, 255.0)
        try:
            stroke = tract_to_stroke(pts, params.stroke_width, tuple(color), cfg.rdp_epsilon, cfg.fit_error)
        except InvalidInput:
            # tract collapsed to one canvas point after mapping
            skipped += 1
            continue
        draw_stroke(canvas, stroke)
        records.append(StrokeRecord(layer_index, (row, col), (sx, sy), tract, stroke, pts))

    logger.info(
        "layer %d: scale %g, %dx%d working, %d/%d cells active, %d strokes, %d skipped",
        layer_index, factor, work_w, work_h, len(active), dist.size, len(records), skipped,
    )
    return records


def stylize(original, cfg=None):
    """Paint every configured layer in order on a fresh canvas.

    Returns ``(canvas, records)``; identical inputs give identical outputs.
    """
    cfg = cfg or StylizationConfig()
    original = check_color_image(original, "original")
    height, width = original.shape[:2]
    canvas = new_canvas(width, height, cfg.background)
    records = []
    for index, params in enumerate(cfg.layers):
        rng = layer_rng(cfg.rng_seed, index)
        records.extend(stylize_layer(original, canvas, params, cfg, rng, index))
    return canvas, records


def _tract_points(item):
    if isinstance(item, StrokeRecord):
        return item.tract.points
    return np.asarray(getattr(item, "points", item), dtype=np.float64)


def tract_jaggedness(points):
    """Mean absolute turning angle (radians) divided by mean segment length."""
    seg = np.diff(np.asarray(points, dtype=np.float64), axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    seg = seg[lengths > 0]
    lengths = lengths[lengths > 0]
    if len(seg) < 2:
        return None
    heading = np.arctan2(seg[:, 1], seg[:, 0])
    turn = np.angle(np.exp(1j * np.diff(heading)))
    return float(np.mean(np.abs(turn)) / np.mean(lengths))


def smoothness_metric(records):
    """Average tract jaggedness over records whose tracts have >= 3 points; lower is smoother."""
    values = []
    for item in records:
        pts = _tract_points(item)
        if len(pts) >= 3:
            value = tract_jaggedness(pts)
            if value is not None:
                values.append(value)
    if not values:
        raise InvalidInput("smoothness_metric needs at least one tract with 3 or more points")
    return float(np.mean(values))


def format_tracts(records):
    """One tract per line as ``x0,y0 x1,y1 ...`` in canvas coordinates."""
    lines = []
    for rec in records:
        lines.append(" ".join(f"{x:.4f},{y:.4f}" for x, y in rec.canvas_points))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_tracts(text):
    tracts = []
    for line in text.splitlines():
        if line.strip():
            tracts.append(np.array([[float(v) for v in pair.split(",")] for pair in line.split()]))
    return tracts


def global_mean_distance(a, b):
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.sqrt(np.sum(diff * diff, axis=-1)).mean())


def coherence_image(original, cfg=None):
    """Coherence of the configured field at full resolution."""
    cfg = cfg or StylizationConfig()
    return build_field(to_greyscale(original), cfg).coherence_map()

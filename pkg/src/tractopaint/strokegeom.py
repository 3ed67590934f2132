"""Turn tracts into brush strokes: polyline simplification and cubic Bezier fitting."""
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive, check_rgb
from .exceptions import InvalidInput, InvalidParameter

_NEWTON_ITERATIONS = 4
_EPS = 1e-12


@dataclass(frozen=True)
class BrushStroke:
    """A C0 chain of cubic Bezier segments with a constant width and solid colour.

    ``segments`` has shape ``(n, 4, 2)``; segment ``i`` ends exactly where
    segment ``i + 1`` starts.
    """

    segments: np.ndarray
    width: float
    color: tuple

    def __post_init__(self):
        segs = np.asarray(self.segments, dtype=np.float64)
        if segs.ndim != 3 or segs.shape[1:] != (4, 2) or len(segs) == 0:
            raise InvalidInput(f"segments must have shape (n>=1, 4, 2), got {segs.shape}")
        if len(segs) > 1 and not np.array_equal(segs[1:, 0], segs[:-1, 3]):
            raise InvalidInput("consecutive segments must share endpoints")
        segs.setflags(write=False)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "width", check_positive(self.width, "width"))
        object.__setattr__(self, "color", check_rgb(self.color))

    def transformed(self, scale, offset=0.0):
        """Copy with every control point mapped through ``p * scale + offset``."""
        return BrushStroke(self.segments * scale + offset, self.width, self.color)


def _as_points(line, minimum=2):
    pts = np.asarray(line, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInput(f"polyline must have shape (n, 2), got {pts.shape}")
    if len(pts) < minimum:
        raise InvalidInput(f"polyline needs at least {minimum} points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise InvalidInput("polyline contains non-finite coordinates")
    return pts


def point_segment_distance(points, a, b):
    """Distance from each of ``points`` to the closed segment ``ab``."""
    points = np.atleast_2d(points)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(points - a).T)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(*(points - proj).T)


def rdp_keep_mask(line, epsilon):
    """Boolean mask of the points kept by Ramer-Douglas-Peucker."""
    pts = _as_points(line)
    if not np.isfinite(epsilon) or epsilon < 0:
        raise InvalidParameter(f"epsilon must be finite and >= 0, got {epsilon!r}")
    keep = np.zeros(len(pts), dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, len(pts) - 1)]
    while stack:
        first, last = stack.pop()
        if last - first < 2:
            continue
        dist = point_segment_distance(pts[first + 1:last], pts[first], pts[last])
        idx = int(np.argmax(dist))
        if dist[idx] > epsilon:
            split = first + 1 + idx
            keep[split] = True
            stack.append((split, last))
            stack.append((first, split))
    return keep


def rdp_simplify(line, epsilon):
    """Simplify a polyline, keeping both endpoints.

    Every dropped point lies within ``epsilon`` of the segment (not the
    infinite line) between the kept points that bracket it.
    """
    pts = _as_points(line)
    return pts[rdp_keep_mask(pts, epsilon)]


def bezier_eval(ctrl, t):
    t = np.asarray(t, dtype=np.float64)[..., None]
    s = 1.0 - t
    return s**3 * ctrl[0] + 3 * s**2 * t * ctrl[1] + 3 * s * t**2 * ctrl[2] + t**3 * ctrl[3]


def _bezier_d1(ctrl, t):
    t = t[:, None]
    s = 1.0 - t
    return 3 * (s**2 * (ctrl[1] - ctrl[0]) + 2 * s * t * (ctrl[2] - ctrl[1]) + t**2 * (ctrl[3] - ctrl[2]))


def _bezier_d2(ctrl, t):
    t = t[:, None]
    return 6 * ((1.0 - t) * (ctrl[2] - 2 * ctrl[1] + ctrl[0]) + t * (ctrl[3] - 2 * ctrl[2] + ctrl[1]))


def _unit(v):
    n = np.hypot(v[0], v[1])
    return v / n if n > _EPS else v


def _chord_params(pts):
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return cum / cum[-1]


def _generate(pts, u, tan_l, tan_r):
    """Least-squares control points for fixed end tangents."""
    p0, p3 = pts[0], pts[-1]
    s = 1.0 - u
    a1 = (3 * s**2 * u)[:, None] * tan_l
    a2 = (3 * s * u**2)[:, None] * tan_r
    c00 = np.sum(a1 * a1)
    c01 = np.sum(a1 * a2)
    c11 = np.sum(a2 * a2)
    base = ((s**3 + 3 * s**2 * u)[:, None] * p0) + ((3 * s * u**2 + u**3)[:, None] * p3)
    tmp = pts - base
    x0 = np.sum(a1 * tmp)
    x1 = np.sum(a2 * tmp)
    det = c00 * c11 - c01 * c01
    seg_len = np.hypot(*(p3 - p0))
    alpha_l = alpha_r = 0.0
    if abs(det) > _EPS * max(1.0, c00 * c11):
        alpha_l = (x0 * c11 - x1 * c01) / det
        alpha_r = (c00 * x1 - c01 * x0) / det
    floor = 1e-6 * seg_len
    if alpha_l < floor or alpha_r < floor:
        alpha_l = alpha_r = seg_len / 3.0
    return np.array([p0, p0 + alpha_l * tan_l, p3 + alpha_r * tan_r, p3])


def _reparameterize(ctrl, pts, u):
    q = bezier_eval(ctrl, u)
    d1 = _bezier_d1(ctrl, u)
    d2 = _bezier_d2(ctrl, u)
    diff = q - pts
    num = np.sum(diff * d1, axis=1)
    den = np.sum(d1 * d1, axis=1) + np.sum(diff * d2, axis=1)
    step = np.divide(num, den, out=np.zeros_like(num), where=np.abs(den) > _EPS)
    return np.clip(u - step, 0.0, 1.0)


def _max_error(ctrl, pts, u):
    dist = np.hypot(*(bezier_eval(ctrl, u) - pts).T)
    inner = dist[1:-1]
    split = 1 + int(np.argmax(inner))
    return float(dist.max()), split


def _fit_cubic(pts, tan_l, tan_r, max_error, out):
    if len(pts) == 2:
        dist = np.hypot(*(pts[1] - pts[0])) / 3.0
        out.append(np.array([pts[0], pts[0] + tan_l * dist, pts[1] + tan_r * dist, pts[1]]))
        return
    u = _chord_params(pts)
    ctrl = _generate(pts, u, tan_l, tan_r)
    err, split = _max_error(ctrl, pts, u)
    if err <= max_error:
        out.append(ctrl)
        return
    for _ in range(_NEWTON_ITERATIONS):
        u = _reparameterize(ctrl, pts, u)
        ctrl = _generate(pts, u, tan_l, tan_r)
        err, split = _max_error(ctrl, pts, u)
        if err <= max_error:
            out.append(ctrl)
            return
    center = _unit(pts[split - 1] - pts[split + 1])
    if np.hypot(*center) <= _EPS:
        center = _unit(pts[split - 1] - pts[split])
    _fit_cubic(pts[: split + 1], tan_l, center, max_error, out)
    _fit_cubic(pts[split:], -center, tan_r, max_error, out)


def _drop_repeats(pts):
    if len(pts) < 2:
        return pts
    step = np.any(np.diff(pts, axis=0) != 0.0, axis=1)
    return pts[np.concatenate([[True], step])]


def fit_bezier(line, max_error):
    """Piecewise cubic Bezier fit through a polyline (Schneider's method).

    Chord-length parameters are refined by Newton-Raphson; a segment whose
    worst point still misses by more than ``max_error`` is split there and
    both halves are fitted recursively. Two points give one straight segment
    with inner controls at the chord thirds. Returns an ``(n, 4, 2)`` array.
    """
    max_error = check_positive(max_error, "max_error")
    pts = _drop_repeats(_as_points(line))
    if len(pts) < 2:
        raise InvalidInput("need at least two distinct points to fit a curve")
    if len(pts) == 2:
        p0, p3 = pts
        return np.array([[p0, p0 + (p3 - p0) / 3.0, p0 + 2.0 * (p3 - p0) / 3.0, p3]])
    tan_l = _unit(pts[1] - pts[0])
    tan_r = _unit(pts[-2] - pts[-1])
    out = []
    _fit_cubic(pts, tan_l, tan_r, max_error, out)
    segs = np.array(out)
    # pin shared endpoints so the chain is exactly C0
    segs[1:, 0] = segs[:-1, 3]
    return segs


def tract_to_stroke(tract, width, color, rdp_epsilon=0.5, fit_error=1.0):
    points = getattr(tract, "points", tract)
    simplified = rdp_simplify(_drop_repeats(_as_points(points)), rdp_epsilon)
    return BrushStroke(fit_bezier(simplified, fit_error), width, color)

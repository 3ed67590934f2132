"""Streamline tracing through an orientation field.

A tract solves ``dr/ds = v1(r(s))`` where ``v1`` is the field's minor
eigenvector. Each step is a second-order midpoint step; its local error is
estimated against the third-order Bogacki-Shampine combination built from
the same stages plus one more evaluation.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameter, OutOfBounds, SeedRejected

_MIN_SEPARATION = 1e-6


@dataclass(frozen=True)
class TracerConfig:
    max_length: float = 100.0
    coherence_min: float = 0.5
    initial_step: float = 1.0
    min_step: float = 0.1
    max_step: float = 5.0
    error_tol: float = 0.1

    def __post_init__(self):
        for name in ("max_length", "initial_step", "min_step", "max_step", "error_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidParameter(f"{name} must be finite and > 0, got {value!r}")
        if not self.min_step <= self.initial_step <= self.max_step:
            raise InvalidParameter("require min_step <= initial_step <= max_step")
        if not 0.0 <= self.coherence_min <= 1.0:
            raise InvalidParameter(f"coherence_min must lie in [0, 1], got {self.coherence_min!r}")


@dataclass
class Tract:
    """Ordered sub-pixel polyline produced by the tracer.

    ``forced_steps`` counts steps accepted at ``min_step`` although the error
    estimate still exceeded the tolerance. ``stop_reason`` records why the
    last traced half ended: ``"length"``, ``"border"`` or ``"coherence"``.
    """

    points: np.ndarray
    forced_steps: int = 0
    stop_reason: str = ""
    arc_length: float = field(init=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        seg = np.diff(self.points, axis=0)
        self.arc_length = float(np.hypot(seg[:, 0], seg[:, 1]).sum())

    def __len__(self):
        return len(self.points)

    def midpoint(self):
        """Point halfway along the tract by arc length."""
        pts = self.points
        if len(pts) == 1:
            return float(pts[0, 0]), float(pts[0, 1])
        seg = np.hypot(*np.diff(pts, axis=0).T)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        half = 0.5 * cum[-1]
        i = min(int(np.searchsorted(cum, half, side="right")) - 1, len(seg) - 1)
        t = 0.0 if seg[i] == 0 else (half - cum[i]) / seg[i]
        p = pts[i] + t * (pts[i + 1] - pts[i])
        return float(p[0]), float(p[1])


class _Stop(Exception):
    def __init__(self, reason):
        self.reason = reason


def _aligned(field, x, y, ref, coherence_min):
    if not field.contains(x, y):
        raise _Stop("border")
    sample = field.orientation_at(x, y)
    if sample.degenerate or sample.coherence < coherence_min:
        raise _Stop("coherence")
    dx, dy = sample.direction
    if dx * ref[0] + dy * ref[1] < 0.0:
        return -dx, -dy
    return dx, dy


def _check_seed(field, seed, cfg):
    x, y = float(seed[0]), float(seed[1])
    if not field.contains(x, y):
        raise OutOfBounds(f"seed ({x}, {y}) lies outside the field")
    sample = field.orientation_at(x, y)
    if sample.degenerate or sample.coherence < cfg.coherence_min:
        raise SeedRejected(
            f"coherence {sample.coherence:.4f} at seed ({x}, {y}) is below {cfg.coherence_min}"
        )
    return x, y, sample


def _integrate(field, x, y, direction, cfg, max_length):
    """Trace from ``(x, y)`` heading along ``direction``; returns (points, forced, reason)."""
    points = [(x, y)]
    ref = direction
    h = cfg.initial_step
    travelled = 0.0
    forced = 0
    cmin = cfg.coherence_min
    tol = cfg.error_tol
    while True:
        remaining = max_length - travelled
        if remaining < _MIN_SEPARATION:
            return points, forced, "length"
        try:
            k1 = _aligned(field, x, y, ref, cmin)
            k2 = _aligned(field, x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], k1, cmin)
            k3 = _aligned(field, x + 0.75 * h * k2[0], y + 0.75 * h * k2[1], k2, cmin)
            nx = x + h * k2[0]
            ny = y + h * k2[1]
            # third-order Bogacki-Shampine solution for the error estimate
            bx = x + h * (2.0 / 9.0 * k1[0] + 1.0 / 3.0 * k2[0] + 4.0 / 9.0 * k3[0])
            by = y + h * (2.0 / 9.0 * k1[1] + 1.0 / 3.0 * k2[1] + 4.0 / 9.0 * k3[1])
            _aligned(field, nx, ny, k2, cmin)
        except _Stop as stop:
            if h > cfg.min_step:
                h = max(0.5 * h, cfg.min_step)
                continue
            return points, forced, stop.reason
        err = math.hypot(nx - bx, ny - by)
        if err > tol:
            if h > cfg.min_step:
                h = max(0.5 * h, cfg.min_step)
                continue
            forced += 1
        step_x, step_y = nx - x, ny - y
        step_len = math.hypot(step_x, step_y)
        if step_len < _MIN_SEPARATION:
            return points, forced, "coherence"
        if step_len > remaining:
            scale = remaining / step_len
            nx, ny = x + scale * step_x, y + scale * step_y
            points.append((nx, ny))
            return points, forced, "length"
        points.append((nx, ny))
        travelled += step_len
        ref = (step_x / step_len, step_y / step_len)
        x, y = nx, ny
        if err < 0.25 * tol:
            h = min(1.5 * h, cfg.max_step)


def trace_direction(field, seed, initial_dir, cfg):
    """Trace a single tract starting at ``seed`` and heading along ``initial_dir``."""
    x, y, _ = _check_seed(field, seed, cfg)
    norm = math.hypot(initial_dir[0], initial_dir[1])
    if not norm > 0:
        raise InvalidParameter("initial_dir must be non-zero")
    direction = (initial_dir[0] / norm, initial_dir[1] / norm)
    points, forced, reason = _integrate(field, x, y, direction, cfg, cfg.max_length)
    return Tract(points, forced_steps=forced, stop_reason=reason)


def trace_bidirectional(field, seed, cfg, bidirectional=True):
    """Trace both ways from ``seed`` along the minor eigenvector.

    Each half is limited to ``max_length / 2``; the result runs from the end
    of the backward half through the seed to the end of the forward half.
    With ``bidirectional=False`` only the forward half is traced, using the
    full length budget.
    """
    x, y, sample = _check_seed(field, seed, cfg)
    dx, dy = sample.direction
    if not bidirectional:
        points, forced, reason = _integrate(field, x, y, (dx, dy), cfg, cfg.max_length)
        return Tract(points, forced_steps=forced, stop_reason=reason)
    half = 0.5 * cfg.max_length
    fwd, forced_f, reason = _integrate(field, x, y, (dx, dy), cfg, half)
    bwd, forced_b, _ = _integrate(field, x, y, (-dx, -dy), cfg, half)
    points = bwd[::-1] + fwd[1:]
    return Tract(points, forced_steps=forced_f + forced_b, stop_reason=reason)

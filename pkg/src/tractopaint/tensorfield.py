"""Structure-tensor orientation fields.

The minor eigenvector of the smoothed gradient outer product points along the
direction of least intensity change, which is the direction a brush stroke
should follow. Coherence measures how pronounced that direction is.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import check_positive, check_scalar_image
from .exceptions import InvalidInput, OutOfBounds
from .imagecore import gaussian_blur, gradient

_DEGENERATE_RTOL = 1e-12
_FLAT_EPS = 1e-12


class EigenSystem2(NamedTuple):
    lambda1: float
    lambda2: float
    v1: tuple
    v2: tuple
    degenerate: bool


class OrientationSample(NamedTuple):
    direction: tuple
    coherence: float
    degenerate: bool = False


def eigen2(sxx, sxy, syy):
    """Closed-form eigen decomposition of ``[[sxx, sxy], [sxy, syy]]``.

    Eigenvalues are returned in ascending order. The eigenvector of the
    larger eigenvalue is taken from the column of ``S - lambda1 * I`` whose
    diagonal entry does not suffer cancellation; the minor eigenvector is its
    perpendicular. Isotropic tensors are flagged degenerate with ``v1 = (1, 0)``.
    """
    sxx, sxy, syy = float(sxx), float(sxy), float(syy)
    if not (math.isfinite(sxx) and math.isfinite(sxy) and math.isfinite(syy)):
        raise InvalidInput(f"tensor components must be finite: {(sxx, sxy, syy)}")
    mean = 0.5 * (sxx + syy)
    half_diff = 0.5 * (sxx - syy)
    half_gap = math.hypot(half_diff, sxy)
    if half_gap <= _DEGENERATE_RTOL * max(1.0, abs(mean)):
        return EigenSystem2(mean - half_gap, mean + half_gap, (1.0, 0.0), (0.0, 1.0), True)
    if half_diff >= 0.0:
        cx, cy = half_diff + half_gap, sxy
    else:
        cx, cy = sxy, half_gap - half_diff
    norm = math.hypot(cx, cy)
    v2 = (cx / norm, cy / norm)
    v1 = (-v2[1], v2[0])
    return EigenSystem2(mean - half_gap, mean + half_gap, v1, v2, False)


def coherence(lambda1, lambda2):
    """Squared normalized eigenvalue gap, in [0, 1]; 0 for a flat (zero) tensor."""
    small = max(float(lambda1), 0.0)
    large = max(float(lambda2), 0.0)
    total = small + large
    if total <= _FLAT_EPS:
        return 0.0
    ratio = (large - small) / total
    return ratio * ratio


@dataclass(frozen=True)
class TensorField:
    """Per-pixel symmetric 2x2 tensors stored as three ``(height, width)`` arrays."""

    sxx: np.ndarray
    sxy: np.ndarray
    syy: np.ndarray
    _rows: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        comps = [np.asarray(c, dtype=np.float64) for c in (self.sxx, self.sxy, self.syy)]
        if comps[0].ndim != 2 or any(c.shape != comps[0].shape for c in comps):
            raise InvalidInput("tensor components must be 2D arrays of equal shape")
        if not all(np.all(np.isfinite(c)) for c in comps):
            raise InvalidInput("tensor components must be finite")
        for name, comp in zip(("sxx", "sxy", "syy"), comps):
            comp.setflags(write=False)
            object.__setattr__(self, name, comp)
        # nested lists make scalar lookups in the tracer loop cheap
        stacked = np.stack(comps, axis=-1).tolist()
        object.__setattr__(self, "_rows", stacked)

    @property
    def shape(self):
        return self.sxx.shape

    @property
    def width(self):
        return self.sxx.shape[1]

    @property
    def height(self):
        return self.sxx.shape[0]

    def contains(self, x, y):
        return 0.0 <= x <= self.width - 1 and 0.0 <= y <= self.height - 1

    def tensor_at(self, x, y):
        """Bilinearly interpolated ``(sxx, sxy, syy)`` at sub-pixel ``(x, y)``."""
        width, height = self.width, self.height
        if not (0.0 <= x <= width - 1 and 0.0 <= y <= height - 1):
            raise OutOfBounds(f"({x}, {y}) lies outside the {width}x{height} field")
        x0 = min(int(x), width - 1)
        y0 = min(int(y), height - 1)
        x1 = min(x0 + 1, width - 1)
        y1 = min(y0 + 1, height - 1)
        fx = x - x0
        fy = y - y0
        rows = self._rows
        a, b = rows[y0][x0], rows[y0][x1]
        c, d = rows[y1][x0], rows[y1][x1]
        w00 = (1.0 - fx) * (1.0 - fy)
        w01 = fx * (1.0 - fy)
        w10 = (1.0 - fx) * fy
        w11 = fx * fy
        return (
            w00 * a[0] + w01 * b[0] + w10 * c[0] + w11 * d[0],
            w00 * a[1] + w01 * b[1] + w10 * c[1] + w11 * d[1],
            w00 * a[2] + w01 * b[2] + w10 * c[2] + w11 * d[2],
        )

    def orientation_at(self, x, y):
        """Minor eigenvector and coherence of the interpolated tensor.

        Components are interpolated before decomposing; eigenvectors carry a
        sign ambiguity that makes interpolating them directly ill-defined.
        """
        es = eigen2(*self.tensor_at(x, y))
        if es.degenerate:
            return OrientationSample(es.v1, 0.0, True)
        return OrientationSample(es.v1, coherence(es.lambda1, es.lambda2), False)

    def coherence_map(self):
        """Vectorized per-pixel coherence."""
        half_diff = 0.5 * (self.sxx - self.syy)
        half_gap = np.hypot(half_diff, self.sxy)
        mean = 0.5 * (self.sxx + self.syy)
        small = np.maximum(mean - half_gap, 0.0)
        large = np.maximum(mean + half_gap, 0.0)
        total = small + large
        out = np.zeros_like(total)
        ok = (total > _FLAT_EPS) & (half_gap > _DEGENERATE_RTOL * np.maximum(1.0, np.abs(mean)))
        out[ok] = ((large[ok] - small[ok]) / total[ok]) ** 2
        return out


def orientation_at(field, x, y):
    return field.orientation_at(x, y)


def structure_tensor(img, sigma_d=1.0, rho=1.0):
    """Gaussian-smoothed outer products of the derivative-of-Gaussian gradient."""
    rho = check_positive(rho, "rho")
    ix, iy = gradient(check_scalar_image(img), sigma_d)
    return TensorField(
        gaussian_blur(ix * ix, rho),
        gaussian_blur(ix * iy, rho),
        gaussian_blur(iy * iy, rho),
    )


def gradient_orientation_field(img, sigma_d=1.0):
    """Rank-1 tensors of the raw gradient, without any neighbourhood smoothing.

    The minor eigenvector of this field is the normal to the gradient, so the
    same tracer can follow either field.
    """
    check_positive(sigma_d, "sigma_d")
    ix, iy = gradient(check_scalar_image(img), sigma_d)
    return TensorField(ix * ix, ix * iy, iy * iy)

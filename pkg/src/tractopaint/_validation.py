"""Input validation helpers shared by the public functions and estimators."""
import math
import numbers

import numpy as np

from .exceptions import InvalidInput, InvalidParameter


def check_positive(value, name):
    """Return ``value`` as a float, raising InvalidParameter unless finite and > 0."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidParameter(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameter(f"{name} must be finite and > 0, got {value!r}")
    return value


def check_scalar_image(img, name="img"):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be a 2D array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInput(f"{name} must be at least 1x1")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite values")
    return arr


def check_color_image(img, name="img"):
    """Validate an RGB image of shape (height, width, 3) with channels in [0, 255].

    Integer arrays are promoted to float64; an alpha channel is not accepted
    here (decode_image composites it away).
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInput(f"{name} must have shape (height, width, 3), got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInput(f"{name} must be at least 1x1")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite values")
    if arr.min() < 0 or arr.max() > 255:
        raise InvalidInput(f"{name} channel values must lie in [0, 255]")
    return arr


def check_rgb(color, name="color"):
    rgb = tuple(float(c) for c in color)
    if len(rgb) != 3 or not all(math.isfinite(c) and 0 <= c <= 255 for c in rgb):
        raise InvalidParameter(f"{name} must be three values in [0, 255], got {color!r}")
    return rgb

"""Raster images: decoding, greyscale, Gaussian filtering and sub-pixel sampling.

Images are plain numpy arrays. A colour image has shape ``(height, width, 3)``
with float channels in [0, 255]; a scalar image has shape ``(height, width)``.
Pixel coordinates are ``(x, y) = (column, row)`` with the origin at the
centre of the top-left pixel.
"""
import io
import math

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from ._validation import check_color_image, check_positive, check_scalar_image
from .exceptions import DecodeError, InvalidParameter, OutOfBounds

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SUPPORTED_FORMATS = {"PNG", "JPEG"}


def decode_image(data):
    """Decode PNG or JPEG bytes into a float64 RGB array.

    Transparent pixels are composited over white.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format not in _SUPPORTED_FORMATS:
                raise DecodeError(f"unsupported image format: {im.format}")
            im.load()
            if im.mode in ("RGBA", "LA") or (im.mode == "P" and "transparency" in im.info):
                rgba = im.convert("RGBA")
                background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                rgb = Image.alpha_composite(background, rgba).convert("RGB")
            else:
                rgb = im.convert("RGB")
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode image: {exc}") from exc
    return np.asarray(rgb, dtype=np.float64)


def encode_png(img):
    """Encode an RGB array as 8-bit PNG bytes (channels rounded and clipped)."""
    arr = check_color_image(img)
    pixels = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def read_image(path):
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def write_png(path, img):
    with open(path, "wb") as fh:
        fh.write(encode_png(img))


def to_greyscale(img):
    """Rec. 601 luma of an RGB image."""
    arr = check_color_image(img)
    r, g, b = LUMA_WEIGHTS
    return r * arr[..., 0] + g * arr[..., 1] + b * arr[..., 2]


def gaussian_kernel(sigma):
    """Normalized 1D Gaussian taps truncated at radius ``ceil(3 * sigma)``."""
    sigma = check_positive(sigma, "sigma")
    radius = math.ceil(3 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-0.5 * (offsets / sigma) ** 2)
    return weights / weights.sum()


def gaussian_derivative_kernel(sigma):
    """1D derivative-of-Gaussian taps for correlation.

    Scaled so that a unit-slope ramp maps to exactly 1, which keeps the
    truncated kernel consistent with the analytic derivative.
    """
    sigma = check_positive(sigma, "sigma")
    radius = math.ceil(3 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = offsets * np.exp(-0.5 * (offsets / sigma) ** 2)
    return weights / np.dot(weights, offsets)


def _correlate(img, weights, axis):
    # mode="nearest" replicates the edge pixel
    return ndimage.correlate1d(img, weights, axis=axis, mode="nearest")


def gaussian_blur(img, sigma):
    """Separable Gaussian blur with edge replication; shape is preserved."""
    weights = gaussian_kernel(sigma)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        return np.stack([gaussian_blur(arr[..., c], sigma) for c in range(arr.shape[2])], axis=-1)
    arr = check_scalar_image(arr)
    return _correlate(_correlate(arr, weights, axis=1), weights, axis=0)


def gradient(img, sigma):
    """Derivative-of-Gaussian gradient ``(I_x, I_y)``.

    ``I_x`` is the derivative along columns (x), ``I_y`` along rows (y).
    """
    smooth = gaussian_kernel(sigma)
    deriv = gaussian_derivative_kernel(sigma)
    arr = check_scalar_image(img)
    ix = _correlate(_correlate(arr, deriv, axis=1), smooth, axis=0)
    iy = _correlate(_correlate(arr, smooth, axis=1), deriv, axis=0)
    return ix, iy


def bilinear_sample(img, x, y):
    """Bilinearly interpolate ``img`` at sub-pixel ``(x, y)``.

    Works for scalar images (returns a float) and multi-channel images
    (returns an array with one value per channel).
    """
    height, width = img.shape[:2]
    if not (0.0 <= x <= width - 1 and 0.0 <= y <= height - 1):
        raise OutOfBounds(f"({x}, {y}) lies outside [0, {width - 1}] x [0, {height - 1}]")
    x0 = min(int(x), width - 1)
    y0 = min(int(y), height - 1)
    x1 = min(x0 + 1, width - 1)
    y1 = min(y0 + 1, height - 1)
    fx = x - x0
    fy = y - y0
    top = (1.0 - fx) * img[y0, x0] + fx * img[y0, x1]
    bottom = (1.0 - fx) * img[y1, x0] + fx * img[y1, x1]
    value = (1.0 - fy) * top + fy * bottom
    return float(value) if np.ndim(value) == 0 else np.asarray(value, dtype=np.float64)


def resampled_shape(shape, factor):
    height, width = shape[:2]
    return max(1, round(height / factor)), max(1, round(width / factor))


def working_to_source(coords, factor, source_size):
    """Map working-image coordinates to source coordinates (pixel-centre aligned)."""
    return np.clip((np.asarray(coords, dtype=np.float64) + 0.5) * factor - 0.5, 0.0, source_size - 1)


def source_to_working(coords, factor, working_size):
    return np.clip((np.asarray(coords, dtype=np.float64) + 0.5) / factor - 0.5, 0.0, working_size - 1)


def resample(img, factor, mode="resize"):
    """Rescale an image by ``1 / factor`` for one painting layer.

    With ``mode="resize"`` the image is Gaussian-prefiltered (sigma =
    factor / 2, only when downsampling) and bilinearly resampled to
    ``max(1, round(dim / factor))`` pixels per axis. With ``mode="blur_only"``
    the dimensions are kept and the image is blurred with sigma = factor.
    """
    factor = check_positive(factor, "factor")
    arr = np.asarray(img, dtype=np.float64)
    if mode == "blur_only":
        return gaussian_blur(arr, factor)
    if mode != "resize":
        raise InvalidParameter(f"resize_mode must be 'resize' or 'blur_only', got {mode!r}")
    if factor == 1.0:
        return arr.copy()
    if factor > 1.0:
        arr = gaussian_blur(arr, factor / 2.0)
    height, width = arr.shape[:2]
    out_h, out_w = resampled_shape(arr.shape, factor)
    ys = working_to_source(np.arange(out_h), factor, height)
    xs = working_to_source(np.arange(out_w), factor, width)
    return _bilinear_grid(arr, xs, ys)


def _bilinear_grid(arr, xs, ys):
    height, width = arr.shape[:2]
    x0 = np.minimum(np.floor(xs).astype(int), width - 1)
    y0 = np.minimum(np.floor(ys).astype(int), height - 1)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    fx = xs - x0
    fy = ys - y0
    if arr.ndim == 3:
        fx = fx[:, None]
        fy = fy[:, None, None]
    else:
        fy = fy[:, None]
    top = (1.0 - fx) * arr[y0][:, x0] + fx * arr[y0][:, x1]
    bottom = (1.0 - fx) * arr[y1][:, x0] + fx * arr[y1][:, x1]
    return (1.0 - fy) * top + fy * bottom

"""Painterly rendering that places brush strokes by tractography over the structure tensor."""
from .config import DEFAULT_LAYERS, LayerParams, StylizationConfig, load_config, parse_config
from .estimator import PainterlyStylizer, StructureTensor
from .exceptions import (
    DecodeError,
    InvalidInput,
    InvalidParameter,
    OutOfBounds,
    SeedRejected,
    TractoPaintError,
)
from .imagecore import decode_image, encode_png, read_image, to_greyscale, write_png
from .pipeline import StrokeRecord, smoothness_metric, stylize, stylize_layer
from .tensorfield import TensorField, coherence, eigen2, gradient_orientation_field, structure_tensor
from .tracer import Tract, TracerConfig, trace_bidirectional, trace_direction

__version__ = "0.1.0"

__all__ = [
    "decode_image",
    "encode_png",
    "read_image",
    "to_greyscale",
    "write_png",
    "DEFAULT_LAYERS",
    "DecodeError",
    "InvalidInput",
    "InvalidParameter",
    "LayerParams",
    "OutOfBounds",
    "PainterlyStylizer",
    "SeedRejected",
    "StrokeRecord",
    "StructureTensor",
    "StylizationConfig",
    "TensorField",
    "Tract",
    "TracerConfig",
    "TractoPaintError",
    "coherence",
    "eigen2",
    "gradient_orientation_field",
    "load_config",
    "parse_config",
    "smoothness_metric",
    "structure_tensor",
    "stylize",
    "stylize_layer",
    "trace_bidirectional",
    "trace_direction",
]

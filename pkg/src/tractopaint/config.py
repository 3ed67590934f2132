"""Stylization parameters and the ``key = value`` config file format.

Example file::

    # coarse-to-fine painting, two layers only
    layers = 2
    rng_seed = 7
    field_kind = gradient
    layer.1.stroke_width = 40
    background = 0, 0, 0
"""
import dataclasses
import math
from dataclasses import dataclass, field

from .exceptions import InvalidParameter

MAX_RGB_DISTANCE = math.sqrt(3) * 255.0


class ConfigError(InvalidParameter):
    """A config key is unknown or holds an invalid value."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class LayerParams:
    scale_factor: float
    stroke_length: float
    stroke_width: float
    color_threshold: float

    def __post_init__(self):
        for name in ("scale_factor", "stroke_length", "stroke_width", "color_threshold"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidParameter(f"{name} must be finite and > 0, got {value!r}")
        if self.color_threshold > MAX_RGB_DISTANCE:
            raise InvalidParameter(f"color_threshold must not exceed {MAX_RGB_DISTANCE:.3f}")


# scale factor, stroke length, stroke width, colour threshold per layer
DEFAULT_LAYERS = (
    LayerParams(10.0, 1000.0, 50.0, 100.0),
    LayerParams(5.0, 500.0, 25.0, 100.0),
    LayerParams(1.0, 100.0, 5.0, 50.0),
    LayerParams(0.5, 100.0, 2.5, 50.0),
)

FIELD_KINDS = ("structure_tensor", "gradient")
RESIZE_MODES = ("resize", "blur_only")
LENGTH_SPACES = ("working", "original")


@dataclass(frozen=True)
class StylizationConfig:
    layers: tuple = DEFAULT_LAYERS
    field_kind: str = "structure_tensor"
    sigma_d: float = 1.0
    rho: float = 1.0
    coherence_min: float = 0.5
    rng_seed: int = 0
    initial_step: float = 1.0
    min_step: float = 0.1
    # None: one cell width in working-image pixels
    max_step: float = None
    error_tol: float = 0.1
    rdp_epsilon: float = 0.5
    fit_error: float = 1.0
    background: tuple = (255.0, 255.0, 255.0)
    resize_mode: str = "resize"
    bidirectional: bool = True
    length_space: str = "working"
    seed_jitter: bool = False

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        for layer in self.layers:
            if not isinstance(layer, LayerParams):
                raise ConfigError("layers", f"expected LayerParams, got {type(layer).__name__}")
        for name in ("sigma_d", "rho", "initial_step", "min_step", "error_tol", "fit_error"):
            _require_positive(name, getattr(self, name))
        if self.max_step is not None:
            _require_positive("max_step", self.max_step)
        if not (math.isfinite(self.rdp_epsilon) and self.rdp_epsilon >= 0):
            raise ConfigError("rdp_epsilon", "must be finite and >= 0")
        if not 0.0 <= self.coherence_min <= 1.0:
            raise ConfigError("coherence_min", "must lie in [0, 1]")
        if self.field_kind not in FIELD_KINDS:
            raise ConfigError("field_kind", f"must be one of {FIELD_KINDS}")
        if self.resize_mode not in RESIZE_MODES:
            raise ConfigError("resize_mode", f"must be one of {RESIZE_MODES}")
        if self.length_space not in LENGTH_SPACES:
            raise ConfigError("length_space", f"must be one of {LENGTH_SPACES}")
        if not isinstance(self.rng_seed, int) or not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed", "must be an integer in [0, 2**64)")
        bg = tuple(float(c) for c in self.background)
        if len(bg) != 3 or not all(0 <= c <= 255 for c in bg):
            raise ConfigError("background", "must be three values in [0, 255]")
        object.__setattr__(self, "background", bg)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _require_positive(key, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(key, f"must be finite and > 0, got {value!r}")


def _parse_bool(key, text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def _parse_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None


def _parse_int(key, text):
    try:
        return int(text, 0)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _parse_rgb(key, text):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(key, f"expected three comma-separated values, got {text!r}")
    return tuple(_parse_float(key, p) for p in parts)


_FLOAT_KEYS = {
    "sigma_d", "rho", "coherence_min", "initial_step", "min_step",
    "max_step", "error_tol", "rdp_epsilon", "fit_error",
}
_CHOICE_KEYS = {"field_kind": FIELD_KINDS, "resize_mode": RESIZE_MODES, "length_space": LENGTH_SPACES}
_BOOL_KEYS = {"bidirectional", "seed_jitter"}
_LAYER_KEYS = {f.name for f in dataclasses.fields(LayerParams)}


def parse_config(text):
    """Parse config text; keys not given keep their defaults."""
    values = {}
    layer_count = None
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "layers":
            layer_count = _parse_int(key, value)
            if layer_count < 0:
                raise ConfigError(key, "must be >= 0")
        elif key.startswith("layer."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1].isdigit() or parts[2] not in _LAYER_KEYS:
                raise ConfigError(key, "expected layer.N.<scale_factor|stroke_length|stroke_width|color_threshold>")
            index = int(parts[1])
            if index < 1:
                raise ConfigError(key, "layers are numbered from 1")
            overrides.setdefault(index, {})[parts[2]] = _parse_float(key, value)
        elif key in _FLOAT_KEYS:
            values[key] = _parse_float(key, value)
        elif key in _CHOICE_KEYS:
            if value not in _CHOICE_KEYS[key]:
                raise ConfigError(key, f"must be one of {_CHOICE_KEYS[key]}, got {value!r}")
            values[key] = value
        elif key in _BOOL_KEYS:
            values[key] = _parse_bool(key, value)
        elif key == "rng_seed":
            values[key] = _parse_int(key, value)
        elif key == "background":
            values[key] = _parse_rgb(key, value)
        else:
            raise ConfigError(key, "unknown config key")

    count = layer_count if layer_count is not None else max([len(DEFAULT_LAYERS), *overrides])
    layers = []
    for index in range(1, count + 1):
        base = DEFAULT_LAYERS[index - 1] if index <= len(DEFAULT_LAYERS) else None
        fields = dataclasses.asdict(base) if base else {}
        fields.update(overrides.get(index, {}))
        missing = _LAYER_KEYS - fields.keys()
        if missing:
            raise ConfigError(f"layer.{index}.{sorted(missing)[0]}", "required for layers beyond the defaults")
        try:
            layers.append(LayerParams(**fields))
        except InvalidParameter as exc:
            raise ConfigError(f"layer.{index}", str(exc)) from None
    unused = [i for i in overrides if i > count]
    if unused:
        raise ConfigError(f"layer.{unused[0]}", f"only {count} layers configured")
    try:
        return StylizationConfig(layers=tuple(layers), **values)
    except ConfigError:
        raise
    except InvalidParameter as exc:
        raise ConfigError("config", str(exc)) from None


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg):
    """Serialize a config back into the text format."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "layers":
            lines.append(f"layers = {len(value)}")
            for i, layer in enumerate(value, 1):
                for key, v in dataclasses.asdict(layer).items():
                    lines.append(f"layer.{i}.{key} = {v!r}")
        elif value is None:
            continue
        elif f.name == "background":
            lines.append("background = " + ", ".join(repr(c) for c in value))
        elif isinstance(value, bool):
            lines.append(f"{f.name} = {str(value).lower()}")
        else:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"

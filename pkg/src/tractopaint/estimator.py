"""scikit-learn style wrappers so the painter composes with pipelines and grid tools.

Both estimators are stateless transforms: ``fit`` only validates the
hyper-parameters and freezes them into a config.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_color_image, check_positive, check_scalar_image
from .config import DEFAULT_LAYERS, LayerParams, StylizationConfig
from .exceptions import InvalidInput, InvalidParameter
from .imagecore import to_greyscale
from .pipeline import build_field, stylize


def _as_image_batch(X):
    """Return (images, single) where ``single`` marks a lone image input."""
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [X], True
    if isinstance(X, np.ndarray) and X.ndim == 4:
        return list(X), False
    if isinstance(X, (list, tuple)):
        return list(X), False
    raise InvalidInput("X must be an (H, W, 3) image, an (N, H, W, 3) stack or a list of images")


class PainterlyStylizer(TransformerMixin, BaseEstimator):
    """Repaint RGB images with tractography-guided brush strokes.

    Parameters mirror :class:`tractopaint.config.StylizationConfig`;
    ``layers=None`` selects the four default layers.

    After ``transform`` the stroke provenance of the last image is kept in
    ``strokes_``.
    """

    def __init__(
        self,
        layers=None,
        field_kind="structure_tensor",
        sigma_d=1.0,
        rho=1.0,
        coherence_min=0.5,
        rng_seed=0,
        initial_step=1.0,
        min_step=0.1,
        max_step=None,
        error_tol=0.1,
        rdp_epsilon=0.5,
        fit_error=1.0,
        background=(255, 255, 255),
        resize_mode="resize",
        bidirectional=True,
        length_space="working",
        seed_jitter=False,
    ):
        self.layers = layers
        self.field_kind = field_kind
        self.sigma_d = sigma_d
        self.rho = rho
        self.coherence_min = coherence_min
        self.rng_seed = rng_seed
        self.initial_step = initial_step
        self.min_step = min_step
        self.max_step = max_step
        self.error_tol = error_tol
        self.rdp_epsilon = rdp_epsilon
        self.fit_error = fit_error
        self.background = background
        self.resize_mode = resize_mode
        self.bidirectional = bidirectional
        self.length_space = length_space
        self.seed_jitter = seed_jitter

    @classmethod
    def from_config(cls, cfg):
        params = {k: getattr(cfg, k) for k in cls._get_param_names()}
        return cls(**params)

    def _make_config(self):
        layers = DEFAULT_LAYERS if self.layers is None else self.layers
        layers = tuple(l if isinstance(l, LayerParams) else LayerParams(*l) for l in layers)
        params = self.get_params()
        params["layers"] = layers
        return StylizationConfig(**params)

    def fit(self, X=None, y=None):
        self.config_ = self._make_config()
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        images, single = _as_image_batch(X)
        out = []
        for img in images:
            canvas, records = stylize(check_color_image(img, "X"), self.config_)
            self.strokes_ = records
            out.append(canvas.pixels)
        return out[0] if single else out


class StructureTensor(TransformerMixin, BaseEstimator):
    """Per-pixel orientation tensors ``(sxx, sxy, syy)`` of an image.

    ``kind="gradient"`` gives the unsmoothed rank-1 tensors of the raw
    gradient instead. ``transform`` returns an ``(H, W, 3)`` array.
    """

    def __init__(self, sigma_d=1.0, rho=1.0, kind="structure_tensor"):
        self.sigma_d = sigma_d
        self.rho = rho
        self.kind = kind

    def fit(self, X=None, y=None):
        check_positive(self.sigma_d, "sigma_d")
        check_positive(self.rho, "rho")
        if self.kind not in ("structure_tensor", "gradient"):
            raise InvalidParameter(f"kind must be 'structure_tensor' or 'gradient', got {self.kind!r}")
        self.config_ = StylizationConfig(field_kind=self.kind, sigma_d=self.sigma_d, rho=self.rho)
        return self

    def _field(self, X):
        check_is_fitted(self, "config_")
        arr = np.asarray(X, dtype=np.float64)
        grey = to_greyscale(arr) if arr.ndim == 3 else check_scalar_image(arr, "X")
        return build_field(grey, self.config_)

    def transform(self, X):
        field = self._field(X)
        return np.stack([field.sxx, field.sxy, field.syy], axis=-1)

    def orientation(self, X):
        """Minor-eigenvector angle (radians, in (-pi/2, pi/2]) and coherence maps."""
        field = self._field(X)
        coh = field.coherence_map()
        major = 0.5 * np.arctan2(2.0 * field.sxy, field.sxx - field.syy)
        angle = major + np.pi / 2
        angle = np.where(angle > np.pi / 2, angle - np.pi, angle)
        return angle, coh

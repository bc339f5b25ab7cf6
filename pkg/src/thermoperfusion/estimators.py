"""Scikit-learn style transformer wrappers around the frame-level algorithms.

These make the segmentation and perfusion steps composable with sklearn
pipelines and parameter search (get_params/set_params, clone). The
underlying functional API lives in segmentation / perfusion.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import InvalidInputError
from .model import FaceMask, ModelParameters, ModelVariant, ThermalFrame, celsius_to_kelvin
from .perfusion import perfuse_frame
from .segmentation import DEFAULT_BIN_COUNT, segment_face


def check_frame(X) -> ThermalFrame:
    """Coerce a ThermalFrame or 2-D array of deg C values to a ThermalFrame."""
    if isinstance(X, ThermalFrame):
        return X
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError("expected a ThermalFrame or 2-D array")
    return ThermalFrame(data=arr)


def check_frames(X) -> list[ThermalFrame]:
    """Coerce a frame, an iterable of frames, or a 3-D stack to a list."""
    if isinstance(X, ThermalFrame):
        return [X]
    arr = np.asarray(X, dtype=object) if not isinstance(X, np.ndarray) else X
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [ThermalFrame(data=X[i]) for i in range(X.shape[0])]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [ThermalFrame(data=X)]
    return [check_frame(x) for x in X]


class OtsuFaceSegmenter(BaseEstimator, TransformerMixin):
    """Stateless per-frame Otsu face segmenter.

    fit is a no-op (each frame is thresholded independently); transform
    maps frames to FaceMask objects.
    """

    def __init__(self, bin_count: int = DEFAULT_BIN_COUNT,
                 keep_largest_component: bool = False):
        self.bin_count = bin_count
        self.keep_largest_component = keep_largest_component

    def fit(self, X, y=None):
        check_frames(X)
        return self

    def transform(self, X) -> list[FaceMask]:
        return [segment_face(f, self.bin_count, self.keep_largest_component)
                for f in check_frames(X)]


class PerfusionMapper(BaseEstimator, TransformerMixin):
    """Maps thermal frames to blood-perfusion frames over their face masks.

    With segmenter=None the whole frame is treated as face. Pixel issues
    from the last transform are kept on `issues_`.
    """

    def __init__(self, variant: str = "full", output_scale: float | None = None,
                 ambient_c: float = 24.0, segmenter: OtsuFaceSegmenter | None = None):
        self.variant = variant
        self.output_scale = output_scale
        self.ambient_c = ambient_c
        self.segmenter = segmenter

    def _params(self) -> ModelParameters:
        return ModelParameters(
            T_e=celsius_to_kelvin(self.ambient_c),
            variant=ModelVariant(self.variant),
            output_scale=self.output_scale,
        )

    def fit(self, X, y=None):
        check_frames(X)
        self._params()
        return self

    def transform(self, X):
        frames = check_frames(X)
        params = self._params()
        if self.segmenter is not None:
            masks = self.segmenter.transform(frames)
        else:
            masks = [FaceMask(bits=np.ones(f.data.shape, dtype=bool))
                     for f in frames]
        out = []
        self.issues_ = []
        for frame, mask in zip(frames, masks):
            pframe, issues = perfuse_frame(frame, mask, params)
            out.append(pframe)
            self.issues_.append(issues)
        return out

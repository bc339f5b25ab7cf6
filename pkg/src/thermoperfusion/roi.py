"""ROI mean extraction, per-set averaging, and valence-vs-baseline differences.

Averaging order is per-frame ROI mean first, then across frames of a set;
the set summary is (mean, sample standard deviation with n-1 denominator).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyRoiError, InvalidInputError, ParameterError, UndefinedPercentageError
from .model import (
    FOREHEAD_ROI_SIZE,
    POINT_ROI_SIZE,
    FaceMask,
    PerfusionFrame,
    RoiName,
    RoiRect,
    RoiSet,
    SetLabel,
    ThermalFrame,
)


class Quantity(str, Enum):
    TEMPERATURE = "TEMPERATURE"
    PERFUSION = "PERFUSION"


@dataclass(frozen=True)
class RoiSeries:
    """Per-frame ROI means for one set, one ROI, one quantity."""

    roi_name: RoiName
    quantity: Quantity
    set_label: SetLabel
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or len(v) == 0:
            raise InvalidInputError("series must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("series contains non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "roi_name", RoiName(self.roi_name))
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        object.__setattr__(self, "set_label", SetLabel(self.set_label))


@dataclass(frozen=True)
class DiffResult:
    """Valence-minus-baseline absolute and percentage differences."""

    roi_name: RoiName
    quantity: Quantity
    valence_label: SetLabel
    mean_baseline: float
    sd_baseline: float
    mean_valence: float
    sd_valence: float
    delta_abs: float
    delta_pct: float


def roi_mean(frame, roi, mask: FaceMask | None = None, exclude=None) -> float:
    """Mean over a rectangular ROI, or over mask-true pixels for TOTAL_FACE.

    frame is a ThermalFrame or PerfusionFrame; roi is a RoiRect or
    RoiName.TOTAL_FACE. exclude is an optional boolean grid of pixels to
    drop from the mean (flagged singular perfusion pixels).
    """
    data = frame.data
    if isinstance(roi, RoiRect):
        roi.validate_against(*data.shape)
        sel = np.zeros(data.shape, dtype=bool)
        sel[roi.slices()] = True
    elif RoiName(roi) is RoiName.TOTAL_FACE:
        if mask is None:
            raise ParameterError("TOTAL_FACE requires a face mask")
        if mask.bits.shape != data.shape:
            raise InvalidInputError("mask dimensions must equal frame dimensions")
        sel = mask.bits.copy()
    else:
        raise ParameterError(f"ROI {roi!r} has no rectangle and is not TOTAL_FACE")
    if exclude is not None:
        sel &= ~np.asarray(exclude, dtype=bool)
    n = int(sel.sum())
    if n == 0:
        raise EmptyRoiError(f"ROI {getattr(roi, 'name', roi)} covers no pixels")
    return float(data[sel].sum() / n)


def extract_series(
    frames,
    roi,
    quantity: Quantity,
    set_label: SetLabel,
    masks=None,
    excludes=None,
) -> RoiSeries:
    """Per-frame ROI means across a frame sequence, in frame order."""
    masks = masks if masks is not None else [None] * len(frames)
    excludes = excludes if excludes is not None else [None] * len(frames)
    values = [roi_mean(f, roi, mask=m, exclude=e)
              for f, m, e in zip(frames, masks, excludes)]
    name = roi.name if isinstance(roi, RoiRect) else RoiName(roi)
    return RoiSeries(roi_name=name, quantity=quantity,
                     set_label=set_label, values=np.array(values))


def set_average(series: RoiSeries) -> tuple[float, float]:
    """Mean and sample standard deviation (n-1) of a series."""
    v = series.values
    mean = float(v.mean())
    sd = float(v.std(ddof=1)) if len(v) > 1 else 0.0
    return mean, sd


def diff_pair(
    baseline: tuple[float, float],
    valence: tuple[float, float],
    roi_name: RoiName,
    quantity: Quantity,
    valence_label: SetLabel,
) -> DiffResult:
    """Absolute and percentage difference of a valence set vs baseline."""
    mb, sb = baseline
    mv, sv = valence
    delta = mv - mb
    if mb == 0:
        raise UndefinedPercentageError(
            f"baseline mean is zero for {RoiName(roi_name).value}; "
            "percentage difference undefined"
        )
    pct = delta / mb * 100.0
    return DiffResult(
        roi_name=RoiName(roi_name),
        quantity=Quantity(quantity),
        valence_label=SetLabel(valence_label),
        mean_baseline=mb, sd_baseline=sb,
        mean_valence=mv, sd_valence=sv,
        delta_abs=delta, delta_pct=pct,
    )


def propose_rois(mask: FaceMask) -> RoiSet:
    """Default ROI placement from the face-mask bounding box.

    Nose at the box center; forehead centered in the top fifth; eyes on
    the ocular line (40% down) at +/- quarter width; cheeks at 65% down
    at +/- quarter width; upper-lip points at 80% down closer to the
    midline. Manual placement via the manifest overrides these.
    """
    rows = np.nonzero(mask.bits.any(axis=1))[0]
    cols = np.nonzero(mask.bits.any(axis=0))[0]
    if len(rows) == 0:
        raise EmptyRoiError("mask is empty; cannot propose ROIs")
    top, bottom = int(rows[0]), int(rows[-1])
    left, right = int(cols[0]), int(cols[-1])
    h = bottom - top + 1
    w = right - left + 1
    # Default sizes assume a roughly 360x260 face box; shrink them
    # proportionally for smaller faces so every rectangle stays inside.
    pr, pc = POINT_ROI_SIZE
    fr, fc = FOREHEAD_ROI_SIZE
    pr = max(2, min(pr, h // 10))
    pc = max(2, min(pc, w // 10))
    fr = max(2, min(fr, round(h * 0.14)))
    fc = max(2, min(fc, round(w * 0.42)))

    def point(name, center_r, center_c):
        return RoiRect(name=name, row=int(center_r - pr // 2),
                       col=int(center_c - pc // 2), rows=pr, cols=pc)

    mid_c = left + w // 2
    rects = [
        point(RoiName.NOSE, top + h // 2, mid_c),
        RoiRect(name=RoiName.FOREHEAD, row=int(top + h * 0.15 - fr // 2),
                col=int(mid_c - fc // 2), rows=fr, cols=fc),
        point(RoiName.RIGHT_EYE, top + h * 0.40, left + w * 0.25),
        point(RoiName.LEFT_EYE, top + h * 0.40, left + w * 0.75),
        point(RoiName.RIGHT_CHEEK, top + h * 0.65, left + w * 0.25),
        point(RoiName.LEFT_CHEEK, top + h * 0.65, left + w * 0.75),
        point(RoiName.RIGHT_UPPER_LIP, top + h * 0.80, left + w * 0.38),
        point(RoiName.LEFT_UPPER_LIP, top + h * 0.80, left + w * 0.62),
    ]
    roi_set = RoiSet(rects=tuple(rects))
    roi_set.validate_against(mask.height, mask.width)
    return roi_set

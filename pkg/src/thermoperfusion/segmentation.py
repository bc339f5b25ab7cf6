"""Otsu thresholding of thermal frames into face/background masks.

The face is always the warmer class: acquisition happens in a room well
below facial temperature, so the upper Otsu class is declared face.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHistogramError, ParameterError, SegmentationError
from .model import FaceMask, ThermalFrame

DEFAULT_BIN_COUNT = 256


@dataclass(frozen=True)
class Histogram:
    """Fixed-width histogram over [lo, hi] in deg C."""

    counts: np.ndarray
    lo: float
    hi: float

    @property
    def bin_count(self) -> int:
        return len(self.counts)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.bin_count + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


def frame_histogram(frame: ThermalFrame, bin_count: int = DEFAULT_BIN_COUNT) -> Histogram:
    """Histogram the frame over [min, max] with equal-width bins."""
    if bin_count < 2:
        raise ParameterError("bin_count must be >= 2")
    lo = float(frame.data.min())
    hi = float(frame.data.max())
    if hi <= lo:
        raise DegenerateHistogramError(
            f"frame is constant at {lo} degC; no threshold exists"
        )
    counts, _ = np.histogram(frame.data, bins=bin_count, range=(lo, hi))
    return Histogram(counts=counts.astype(np.int64), lo=lo, hi=hi)


def between_class_variance(hist: Histogram) -> np.ndarray:
    """Between-class variance for each candidate split after bin k.

    Entry k scores the split {bins <= k} vs {bins > k}, using bin centers
    as class values; the last entry (empty upper class) scores 0.
    """
    counts = hist.counts.astype(np.float64)
    centers = hist.centers
    total = counts.sum()
    w0 = np.cumsum(counts) / total
    w1 = 1.0 - w0
    cum_mass = np.cumsum(counts * centers)
    # Class means; empty classes contribute zero variance.
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = np.where(w0 > 0, cum_mass / (w0 * total), 0.0)
        mu1 = np.where(w1 > 0, (cum_mass[-1] - cum_mass) / (w1 * total), 0.0)
    sigma_b = w0 * w1 * (mu1 - mu0) ** 2
    sigma_b[(w0 == 0) | (w1 == 0)] = 0.0
    return sigma_b


def otsu_threshold(frame: ThermalFrame, bin_count: int = DEFAULT_BIN_COUNT) -> float:
    """Threshold (bin upper edge) maximizing between-class variance.

    Ties break toward the lowest qualifying threshold.
    """
    hist = frame_histogram(frame, bin_count)
    sigma_b = between_class_variance(hist)[:-1]
    # Exactly tied splits (empty bins between modes) accumulate last-ulp
    # jitter; a relative band keeps the tie-break at the lowest threshold.
    best = float(sigma_b.max())
    k = int(np.argmax(sigma_b >= best * (1.0 - 1e-12)))
    return float(hist.edges[k + 1])


def segment_face(
    frame: ThermalFrame,
    bin_count: int = DEFAULT_BIN_COUNT,
    keep_largest_component: bool = False,
) -> FaceMask:
    """Threshold the frame and keep the warmer class as the face mask.

    keep_largest_component optionally drops all but the largest
    4-connected warm region; off by default so plain thresholding is
    what the downstream whole-face statistics see.
    """
    thr = otsu_threshold(frame, bin_count)
    bits = frame.data > thr
    if not bits.any():
        raise SegmentationError("warm class is empty; segmentation failed")
    if keep_largest_component:
        bits = _largest_component(bits)
    return FaceMask(bits=bits)


def _largest_component(bits: np.ndarray) -> np.ndarray:
    """Largest 4-connected True region, via iterative flood fill."""
    remaining = bits.copy()
    best = np.zeros_like(bits)
    best_size = 0
    h, w = bits.shape
    while remaining.any():
        seed = np.unravel_index(int(np.argmax(remaining)), remaining.shape)
        comp = np.zeros_like(bits)
        stack = [seed]
        comp[seed] = True
        remaining[seed] = False
        while stack:
            r, c = stack.pop()
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= nr < h and 0 <= nc < w and remaining[nr, nc]:
                    remaining[nr, nc] = False
                    comp[nr, nc] = True
                    stack.append((nr, nc))
        size = int(comp.sum())
        if size > best_size:
            best, best_size = comp, size
    return best

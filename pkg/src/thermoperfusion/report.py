"""Report emission: result tables, percentage-difference chart data, heatmaps.

Numbers are rounded half-up to the printed precision (2 decimals);
perfusion is always printed in the x10^-2 kg/(m^2 s) convention so that
tables stay comparable across model variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .model import RoiName
from .roi import DiffResult, Quantity
from .stats import Significance, TestKind, TestReport

PERFUSION_DISPLAY_FACTOR = 100.0  # print omega in units of 1e-2 kg/(m^2 s)

# Fixed chart ordering: right side first, nose and forehead central,
# then the left side; whole face last.
CHART_ROI_ORDER = (
    RoiName.RIGHT_UPPER_LIP,
    RoiName.RIGHT_CHEEK,
    RoiName.RIGHT_EYE,
    RoiName.NOSE,
    RoiName.FOREHEAD,
    RoiName.LEFT_EYE,
    RoiName.LEFT_CHEEK,
    RoiName.LEFT_UPPER_LIP,
    RoiName.TOTAL_FACE,
)

ROI_DISPLAY_NAMES = {
    RoiName.NOSE: "Nose",
    RoiName.FOREHEAD: "Forehead",
    RoiName.LEFT_EYE: "Left eye",
    RoiName.RIGHT_EYE: "Right eye",
    RoiName.LEFT_CHEEK: "Left cheek",
    RoiName.RIGHT_CHEEK: "Right cheek",
    RoiName.LEFT_UPPER_LIP: "Left upper lip",
    RoiName.RIGHT_UPPER_LIP: "Right upper lip",
    RoiName.TOTAL_FACE: "Total face",
}


def round_half_up(value: float, decimals: int = 2) -> float:
    """Decimal round-half-up (ties away from zero), as printed in tables."""
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def _fmt(value: float, decimals: int = 2) -> str:
    return f"{round_half_up(value, decimals):.{decimals}f}"


def significance_marker(report: TestReport) -> str:
    """'*' for p<0.05, '**' for p<0.001, plus a Wilcoxon arrow suffix."""
    marker = ""
    if report.significance is Significance.P001:
        marker = "**"
    elif report.significance is Significance.P05:
        marker = "*"
    if report.test_used is TestKind.WILCOXON:
        marker += "↓"
    return marker


@dataclass(frozen=True)
class RoiOutcome:
    """One table row: both valence comparisons for one ROI and quantity."""

    roi_name: RoiName
    quantity: Quantity
    diff_negative: DiffResult
    report_negative: TestReport
    diff_positive: DiffResult
    report_positive: TestReport


def _display_scale(quantity: Quantity) -> float:
    return PERFUSION_DISPLAY_FACTOR if quantity is Quantity.PERFUSION else 1.0


def emit_table(outcomes: list[RoiOutcome], quantity: Quantity) -> tuple[str, str]:
    """Render the per-ROI result table; returns (csv_text, markdown_text)."""
    if not outcomes:
        raise ParameterError("no ROI results to tabulate")
    scale = _display_scale(quantity)
    unit = "degC" if quantity is Quantity.TEMPERATURE else "1e-2 kg/(m^2 s)"

    csv_lines = [
        "roi,baseline_mean,baseline_sd,negative_mean,negative_sd,"
        "positive_mean,positive_sd,delta_negative,delta_negative_pct,"
        "marker_negative,delta_positive,delta_positive_pct,marker_positive"
    ]
    md_lines = [
        f"| ROI | Baseline [{unit}] | Negative [{unit}] | Positive [{unit}] "
        "| dNeg | dNeg% | dPos | dPos% |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for oc in outcomes:
        dn, dp = oc.diff_negative, oc.diff_positive
        mn, mp = significance_marker(oc.report_negative), significance_marker(oc.report_positive)
        cells = [
            ROI_DISPLAY_NAMES[oc.roi_name],
            _fmt(dn.mean_baseline * scale), _fmt(dn.sd_baseline * scale),
            _fmt(dn.mean_valence * scale), _fmt(dn.sd_valence * scale),
            _fmt(dp.mean_valence * scale), _fmt(dp.sd_valence * scale),
            _fmt(dn.delta_abs * scale), _fmt(dn.delta_pct), mn,
            _fmt(dp.delta_abs * scale), _fmt(dp.delta_pct), mp,
        ]
        csv_lines.append(",".join(cells))
        md_lines.append(
            f"| {cells[0]} "
            f"| {cells[1]} ({cells[2]}) "
            f"| {cells[3]} ({cells[4]}) "
            f"| {cells[5]} ({cells[6]}) "
            f"| {cells[7]}{mn} | {cells[8]} "
            f"| {cells[10]}{mp} | {cells[11]} |"
        )
    return "\n".join(csv_lines) + "\n", "\n".join(md_lines) + "\n"


def emit_pct_chart_data(outcomes_by_subject: dict[str, list[RoiOutcome]]) -> str:
    """Percentage-difference series CSV in the fixed right-to-left ROI order.

    One row per subject per valence; ROIs absent from a subject's results
    leave empty cells.
    """
    header = ["subject", "valence"] + [ROI_DISPLAY_NAMES[r] for r in CHART_ROI_ORDER]
    lines = [",".join(header)]
    for subject, outcomes in outcomes_by_subject.items():
        by_roi = {oc.roi_name: oc for oc in outcomes}
        for valence, pick in (("negative", lambda oc: oc.diff_negative),
                              ("positive", lambda oc: oc.diff_positive)):
            row = [subject, valence]
            for roi in CHART_ROI_ORDER:
                oc = by_roi.get(roi)
                row.append(_fmt(pick(oc).delta_pct) if oc else "")
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Heatmaps


def _hot_colormap() -> np.ndarray:
    """Fixed 256-entry black-red-yellow-white ramp."""
    i = np.arange(256)
    r = np.clip(i * 3, 0, 255)
    g = np.clip(i * 3 - 255, 0, 255)
    b = np.clip(i * 3 - 510, 0, 255)
    return np.stack([r, g, b], axis=1).astype(np.uint8)


HEATMAP_COLORMAP = _hot_colormap()


def _gray_levels(data: np.ndarray, lo: float, hi: float,
                 mask: np.ndarray | None) -> np.ndarray:
    if hi < lo:
        raise ParameterError(f"invalid heatmap range [{lo}, {hi}]")
    if hi == lo:
        # constant span: everything maps to mid-gray
        levels = np.full(data.shape, 128, dtype=np.uint8)
    else:
        x = np.clip((data - lo) / (hi - lo), 0.0, 1.0) * 255.0
        levels = np.floor(x + 0.5).astype(np.uint8)  # round-half-up
    if mask is not None:
        levels = np.where(mask, levels, 0)
    return levels


def write_heatmap(frame, path, value_range=None, mask=None, colormap: bool = False) -> None:
    """Write a frame as PGM (P5, default) or PPM (P6, fixed colormap).

    value_range is (lo, hi) or None for auto ([min, max] over mask-true
    pixels). Output bytes are deterministic for identical inputs.
    """
    data = frame.data
    bits = mask.bits if mask is not None else None
    if value_range is None:
        sel = data[bits] if bits is not None else data
        if sel.size == 0:
            raise ParameterError("auto range over an empty mask")
        lo, hi = float(sel.min()), float(sel.max())
    else:
        lo, hi = float(value_range[0]), float(value_range[1])
        if hi <= lo:
            raise ParameterError(f"invalid heatmap range [{lo}, {hi}]")
    levels = _gray_levels(data, lo, hi, bits)
    h, w = data.shape
    path = Path(path)
    if colormap:
        rgb = HEATMAP_COLORMAP[levels]
        payload = b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes()
    else:
        payload = b"P5\n%d %d\n255\n" % (w, h) + levels.tobytes()
    path.write_bytes(payload)


def write_mask_pgm(mask, path) -> None:
    """Write a face mask as a binary PGM (face=255, background=0)."""
    levels = np.where(mask.bits, 255, 0).astype(np.uint8)
    h, w = mask.bits.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + levels.tobytes())

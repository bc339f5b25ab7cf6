"""End-to-end session analysis: segment, invert, extract, difference, test.

Frame-level work may fan out across threads; per-series reductions stay
sequential so results are bit-identical regardless of thread count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ModelParameters, RoiName, RoiSet, SessionData, SetLabel, ThermalFrame
from .perfusion import perfuse_frame
from .report import RoiOutcome, emit_pct_chart_data, emit_table
from .roi import Quantity, RoiSeries, diff_pair, roi_mean, set_average
from .segmentation import DEFAULT_BIN_COUNT, segment_face
from .stats import DEFAULT_SENSITIVITY_C, PairingPolicy, TestReport, classify_significance


@dataclass(frozen=True)
class AnalysisResult:
    subject_id: str
    outcomes_temperature: tuple[RoiOutcome, ...]
    outcomes_perfusion: tuple[RoiOutcome, ...]
    warnings: tuple[str, ...] = ()


def _frame_roi_means(frame: ThermalFrame, roi_set: RoiSet,
                     params: ModelParameters, bin_count: int):
    """Per-frame ROI means of temperature and perfusion."""
    mask = segment_face(frame, bin_count)
    pframe, issues = perfuse_frame(frame, mask, params)
    exclude = None
    if issues:
        exclude = np.zeros(frame.data.shape, dtype=bool)
        for issue in issues:
            exclude[issue.row, issue.col] = True
    temp: dict[RoiName, float] = {}
    perf: dict[RoiName, float] = {}
    for rect in roi_set.rects:
        temp[rect.name] = roi_mean(frame, rect)
        perf[rect.name] = roi_mean(pframe, rect, exclude=exclude)
    if roi_set.include_total_face:
        temp[RoiName.TOTAL_FACE] = roi_mean(frame, RoiName.TOTAL_FACE, mask=mask)
        perf[RoiName.TOTAL_FACE] = roi_mean(pframe, RoiName.TOTAL_FACE,
                                            mask=mask, exclude=exclude)
    return temp, perf


def analyze_session(
    session: SessionData,
    params: ModelParameters | None = None,
    bin_count: int = DEFAULT_BIN_COUNT,
    sensitivity_threshold: float = DEFAULT_SENSITIVITY_C,
    pairing: PairingPolicy = PairingPolicy.BLOCK,
    threads: int = 1,
    warnings: tuple[str, ...] = (),
) -> AnalysisResult:
    """Run the full quantitative analysis for one subject."""
    if params is None:
        params = ModelParameters().with_ambient_celsius(session.ambient_c)
    roi_set = session.roi_set
    names = roi_set.names()

    series: dict[tuple[SetLabel, Quantity, RoiName], RoiSeries] = {}
    for label, frames in session.sets().items():
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                per_frame = list(pool.map(
                    lambda f: _frame_roi_means(f, roi_set, params, bin_count),
                    frames))
        else:
            per_frame = [_frame_roi_means(f, roi_set, params, bin_count)
                         for f in frames]
        for quantity, idx in ((Quantity.TEMPERATURE, 0), (Quantity.PERFUSION, 1)):
            for name in names:
                values = np.array([pf[idx][name] for pf in per_frame])
                series[(label, quantity, name)] = RoiSeries(
                    roi_name=name, quantity=quantity,
                    set_label=label, values=values)

    def outcomes_for(quantity: Quantity) -> tuple[RoiOutcome, ...]:
        out = []
        for name in names:
            base = series[(SetLabel.BASELINE, quantity, name)]
            row = {}
            for valence in (SetLabel.NEGATIVE, SetLabel.POSITIVE):
                val = series[(valence, quantity, name)]
                diff = diff_pair(set_average(base), set_average(val),
                                 name, quantity, valence)
                report = classify_significance(
                    base, val, sensitivity_threshold=sensitivity_threshold,
                    pairing=pairing)
                row[valence] = (diff, report)
            out.append(RoiOutcome(
                roi_name=name, quantity=quantity,
                diff_negative=row[SetLabel.NEGATIVE][0],
                report_negative=row[SetLabel.NEGATIVE][1],
                diff_positive=row[SetLabel.POSITIVE][0],
                report_positive=row[SetLabel.POSITIVE][1],
            ))
        return tuple(out)

    return AnalysisResult(
        subject_id=session.subject_id,
        outcomes_temperature=outcomes_for(Quantity.TEMPERATURE),
        outcomes_perfusion=outcomes_for(Quantity.PERFUSION),
        warnings=tuple(warnings),
    )


def _report_to_json(report: TestReport) -> dict:
    return {
        "test_used": report.test_used.value if report.test_used else None,
        "statistic": None if report.statistic != report.statistic else report.statistic,
        "p_value": None if report.p_value != report.p_value else report.p_value,
        "n_pairs": report.n_pairs,
        "normality_p": (None if report.normality_p != report.normality_p
                        else report.normality_p),
        "significance": report.significance.value,
        "technically_significant": report.technically_significant,
        "delta_abs": report.delta_abs,
        "pairing_policy": report.pairing_policy.value,
        "significant": report.significant,
        "diagnostic": report.diagnostic,
    }


def write_report_bundle(result: AnalysisResult, out_dir) -> list[Path]:
    """Write tables, chart data and test reports; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for quantity, outcomes, stem in (
            (Quantity.TEMPERATURE, result.outcomes_temperature, "temperature_table"),
            (Quantity.PERFUSION, result.outcomes_perfusion, "perfusion_table")):
        csv_text, md_text = emit_table(list(outcomes), quantity)
        for suffix, text in ((".csv", csv_text), (".md", md_text)):
            p = out / f"{stem}{suffix}"
            p.write_text(text, encoding="utf-8")
            written.append(p)

    chart = emit_pct_chart_data({result.subject_id: list(result.outcomes_temperature)})
    p = out / "temperature_pct_chart.csv"
    p.write_text(chart, encoding="utf-8")
    written.append(p)
    chart = emit_pct_chart_data({result.subject_id: list(result.outcomes_perfusion)})
    p = out / "perfusion_pct_chart.csv"
    p.write_text(chart, encoding="utf-8")
    written.append(p)

    reports = {
        quantity.value: {
            oc.roi_name.value: {
                "negative": _report_to_json(oc.report_negative),
                "positive": _report_to_json(oc.report_positive),
            }
            for oc in outcomes
        }
        for quantity, outcomes in (
            (Quantity.TEMPERATURE, result.outcomes_temperature),
            (Quantity.PERFUSION, result.outcomes_perfusion))
    }
    doc = {"subject_id": result.subject_id,
           "warnings": list(result.warnings),
           "tests": reports}
    p = out / "test_reports.json"
    p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(p)
    return written

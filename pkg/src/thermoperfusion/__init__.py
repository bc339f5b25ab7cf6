"""Facial thermal recordings to blood-perfusion maps and valence analysis."""

from .errors import ThermoPerfusionError
from .model import (
    FaceMask,
    ModelParameters,
    ModelVariant,
    PerfusionFrame,
    RoiName,
    RoiRect,
    RoiSet,
    SessionData,
    SetLabel,
    ThermalFrame,
    celsius_to_kelvin,
    kelvin_to_celsius,
)
from .perfusion import (
    FluxBreakdown,
    conductive_flux,
    convective_flux,
    flux_breakdown,
    perfuse_frame,
    perfusion_at_pixel,
    radiative_flux,
)
from .segmentation import otsu_threshold, segment_face
from .roi import DiffResult, Quantity, RoiSeries, diff_pair, propose_rois, roi_mean, set_average
from .stats import (
    PairingPolicy,
    Significance,
    TestKind,
    TestReport,
    classify_significance,
    ks_normality,
    paired_t,
    wilcoxon_signed_rank,
)
from .ingest import load_frame, load_manifest, load_session, write_frame
from .report import (
    RoiOutcome,
    emit_pct_chart_data,
    emit_table,
    round_half_up,
    significance_marker,
    write_heatmap,
)
from .pipeline import AnalysisResult, analyze_session, write_report_bundle
from .synth import EllipseSpec, FrameSpec, SessionSpec, synth_frame, synth_session
from .estimators import OtsuFaceSegmenter, PerfusionMapper, check_frame

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "DiffResult",
    "EllipseSpec",
    "FaceMask",
    "FluxBreakdown",
    "FrameSpec",
    "ModelParameters",
    "ModelVariant",
    "OtsuFaceSegmenter",
    "PairingPolicy",
    "PerfusionFrame",
    "PerfusionMapper",
    "Quantity",
    "RoiName",
    "RoiOutcome",
    "RoiRect",
    "RoiSeries",
    "RoiSet",
    "SessionData",
    "SessionSpec",
    "SetLabel",
    "Significance",
    "TestKind",
    "TestReport",
    "ThermalFrame",
    "ThermoPerfusionError",
    "analyze_session",
    "celsius_to_kelvin",
    "check_frame",
    "classify_significance",
    "conductive_flux",
    "convective_flux",
    "diff_pair",
    "emit_pct_chart_data",
    "emit_table",
    "flux_breakdown",
    "kelvin_to_celsius",
    "ks_normality",
    "load_frame",
    "load_manifest",
    "load_session",
    "otsu_threshold",
    "paired_t",
    "perfuse_frame",
    "perfusion_at_pixel",
    "propose_rois",
    "radiative_flux",
    "roi_mean",
    "round_half_up",
    "segment_face",
    "significance_marker",
    "set_average",
    "synth_frame",
    "synth_session",
    "wilcoxon_signed_rank",
    "write_frame",
    "write_heatmap",
    "write_report_bundle",
]

"""Synthetic thermal sessions with known ground truth.

A frame is a warm ellipse (the face) over a cool background, with
optional per-ROI temperature patches and independent Gaussian pixel
noise (sd defaults to the 0.03 degC sensor NETD). Everything is
deterministic for a given 64-bit seed: frame k of set s draws from
SeedSequence([seed, s, k]).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SynthSpecError
from .model import FaceMask, RoiName, RoiRect, RoiSet, SetLabel, ThermalFrame
from .ingest import write_frame
from .roi import propose_rois

DEFAULT_NOISE_SD = 0.03  # degC, sensor NETD


@dataclass(frozen=True)
class EllipseSpec:
    center_row: int
    center_col: int
    semi_rows: int
    semi_cols: int

    def interior(self, height: int, width: int) -> np.ndarray:
        r = np.arange(height)[:, None]
        c = np.arange(width)[None, :]
        return (((r - self.center_row) / self.semi_rows) ** 2
                + ((c - self.center_col) / self.semi_cols) ** 2) <= 1.0


@dataclass(frozen=True)
class FrameSpec:
    """Geometry and temperatures of one synthetic frame family."""

    height: int
    width: int
    background_c: float
    face_c: float
    ellipse: EllipseSpec
    roi_overrides: tuple[tuple[RoiRect, float], ...] = ()
    noise_sd: float = DEFAULT_NOISE_SD

    def __post_init__(self):
        if self.noise_sd < 0:
            raise SynthSpecError("noise_sd must be >= 0")
        if (self.ellipse.center_row - self.ellipse.semi_rows < 0
                or self.ellipse.center_row + self.ellipse.semi_rows >= self.height
                or self.ellipse.center_col - self.ellipse.semi_cols < 0
                or self.ellipse.center_col + self.ellipse.semi_cols >= self.width):
            raise SynthSpecError("ellipse extends outside the frame")


def synth_frame(spec: FrameSpec, seed: int, set_index: int = 0,
                frame_index: int = 0) -> tuple[ThermalFrame, FaceMask]:
    """Render one frame plus its ground-truth mask, deterministically."""
    mask_bits = spec.ellipse.interior(spec.height, spec.width)
    data = np.full((spec.height, spec.width), spec.background_c, dtype=np.float64)
    data[mask_bits] = spec.face_c
    for rect, temp in spec.roi_overrides:
        rect.validate_against(spec.height, spec.width)
        rr, cc = rect.slices()
        if not mask_bits[rr, cc].all():
            raise SynthSpecError(
                f"ROI patch {rect.name.value} extends outside the face ellipse"
            )
        data[rr, cc] = temp
    if spec.noise_sd > 0:
        rng = np.random.default_rng(np.random.SeedSequence([seed, set_index, frame_index]))
        data = data + rng.normal(0.0, spec.noise_sd, size=data.shape)
    return ThermalFrame(data=data, timestamp_index=frame_index), FaceMask(bits=mask_bits)


@dataclass(frozen=True)
class SessionSpec:
    """Full synthetic-session description with injected valence deltas."""

    subject_id: str
    frame: FrameSpec
    roi_set: RoiSet
    baseline_roi_temps: dict[RoiName, float] = field(default_factory=dict)
    deltas: dict[SetLabel, dict[RoiName, float]] = field(default_factory=dict)
    set_sizes: dict[SetLabel, int] = field(default_factory=lambda: {
        SetLabel.BASELINE: 60, SetLabel.NEGATIVE: 240, SetLabel.POSITIVE: 240,
    })
    seed: int = 0
    frame_format: str = "csv"
    ambient_c: float = 24.0
    relative_humidity: float = 63.0
    model_settings: dict = field(default_factory=dict)
    pairing: str = "block"

    def overrides_for(self, label: SetLabel) -> tuple[tuple[RoiRect, float], ...]:
        deltas = self.deltas.get(label, {})
        out = []
        for rect in self.roi_set.rects:
            base = self.baseline_roi_temps.get(rect.name, self.frame.face_c)
            out.append((rect, base + deltas.get(rect.name, 0.0)))
        return tuple(out)


_SET_DIRS = {
    SetLabel.BASELINE: ("baseline", 0),
    SetLabel.NEGATIVE: ("negative", 1),
    SetLabel.POSITIVE: ("positive", 2),
}


def synth_session(spec: SessionSpec, out_dir) -> Path:
    """Write a loadable session (frames + manifest + ground-truth sidecar).

    Returns the manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if spec.frame_format == "csv" else "tpf"
    for label, (dirname, set_index) in _SET_DIRS.items():
        set_dir = out / dirname
        set_dir.mkdir(exist_ok=True)
        frame_spec = FrameSpec(
            height=spec.frame.height, width=spec.frame.width,
            background_c=spec.frame.background_c, face_c=spec.frame.face_c,
            ellipse=spec.frame.ellipse,
            roi_overrides=spec.overrides_for(label),
            noise_sd=spec.frame.noise_sd,
        )
        n = spec.set_sizes[label]
        for k in range(n):
            frame, _ = synth_frame(frame_spec, spec.seed, set_index, k)
            write_frame(frame, set_dir / f"frame_{k:04d}.{ext}",
                        fmt=spec.frame_format)

    rois_json = [
        {"name": r.name.value, "row": r.row, "col": r.col,
         "rows": r.rows, "cols": r.cols}
        for r in spec.roi_set.rects
    ]
    if spec.roi_set.include_total_face:
        rois_json.append({"name": RoiName.TOTAL_FACE.value})
    manifest = {
        "subject_id": spec.subject_id,
        "environment": {"ambient_c": spec.ambient_c,
                        "relative_humidity": spec.relative_humidity},
        "sets": {dirname: {"dir": dirname}
                 for dirname, _ in _SET_DIRS.values()},
        "rois": rois_json,
        "model": spec.model_settings,
        "pairing": spec.pairing,
        "seed": spec.seed,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")

    ground_truth = {
        "subject_id": spec.subject_id,
        "seed": spec.seed,
        "noise_sd": spec.frame.noise_sd,
        "background_c": spec.frame.background_c,
        "face_c": spec.frame.face_c,
        "baseline_roi_temps": {k.value: v for k, v in spec.baseline_roi_temps.items()},
        "deltas": {label.value: {k.value: v for k, v in d.items()}
                   for label, d in spec.deltas.items()},
        "set_sizes": {label.value: n for label, n in spec.set_sizes.items()},
        "mask_pixels": int(spec.frame.ellipse.interior(
            spec.frame.height, spec.frame.width).sum()),
    }
    (out / "ground_truth.json").write_text(
        json.dumps(ground_truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest_path


def session_spec_from_json(doc: dict) -> SessionSpec:
    """Build a SessionSpec from the JSON layout used by the CLI."""
    try:
        ellipse = EllipseSpec(
            center_row=int(doc["ellipse"]["center_row"]),
            center_col=int(doc["ellipse"]["center_col"]),
            semi_rows=int(doc["ellipse"]["semi_rows"]),
            semi_cols=int(doc["ellipse"]["semi_cols"]),
        )
        frame = FrameSpec(
            height=int(doc["height"]), width=int(doc["width"]),
            background_c=float(doc.get("background_c", 24.0)),
            face_c=float(doc.get("face_c", 34.0)),
            ellipse=ellipse,
            noise_sd=float(doc.get("noise_sd", DEFAULT_NOISE_SD)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SynthSpecError(f"bad synthetic-session spec: {exc}") from exc

    if "rois" in doc:
        rects = tuple(
            RoiRect(name=RoiName(r["name"]), row=int(r["row"]), col=int(r["col"]),
                    rows=int(r["rows"]), cols=int(r["cols"]))
            for r in doc["rois"] if r["name"] != RoiName.TOTAL_FACE.value
        )
        roi_set = RoiSet(rects=rects)
    else:
        _, mask = synth_frame(
            FrameSpec(height=frame.height, width=frame.width,
                      background_c=frame.background_c, face_c=frame.face_c,
                      ellipse=ellipse, noise_sd=0.0),
            seed=0)
        roi_set = propose_rois(mask)

    def roi_map(d):
        return {RoiName(k): float(v) for k, v in d.items()}

    deltas = {}
    for key, label in (("negative", SetLabel.NEGATIVE), ("positive", SetLabel.POSITIVE)):
        if key in doc.get("deltas", {}):
            deltas[label] = roi_map(doc["deltas"][key])

    sizes = doc.get("set_sizes", {})
    set_sizes = {
        SetLabel.BASELINE: int(sizes.get("baseline", 60)),
        SetLabel.NEGATIVE: int(sizes.get("negative", 240)),
        SetLabel.POSITIVE: int(sizes.get("positive", 240)),
    }
    return SessionSpec(
        subject_id=str(doc.get("subject_id", "synthetic")),
        frame=frame,
        roi_set=roi_set,
        baseline_roi_temps=roi_map(doc.get("roi_temps", {})),
        deltas=deltas,
        set_sizes=set_sizes,
        seed=int(doc.get("seed", 0)),
        frame_format=str(doc.get("frame_format", "csv")),
        ambient_c=float(doc.get("ambient_c", 24.0)),
        relative_humidity=float(doc.get("relative_humidity", 63.0)),
        model_settings=doc.get("model", {}),
        pairing=str(doc.get("pairing", "block")),
    )

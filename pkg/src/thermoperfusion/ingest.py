"""Frame and session loading: CSV / binary frame files plus JSON manifests.

Frame CSV: one row of comma-separated deg C values per line, UTF-8, LF or
CRLF, lines starting with '#' skipped. Binary frames: magic b"TPF1",
width and height as little-endian uint32, then row-major little-endian
float64 values.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrameFormatError, FrameRangeError, ManifestError, ParameterError, SessionError
from .model import (
    NOMINAL_SET_SIZES,
    ModelParameters,
    ModelVariant,
    RoiName,
    RoiRect,
    RoiSet,
    SessionData,
    SetLabel,
    TEMP_MAX_C,
    TEMP_MIN_C,
    ThermalFrame,
    celsius_to_kelvin,
)
from .stats import DEFAULT_SENSITIVITY_C, PairingPolicy

BINARY_MAGIC = b"TPF1"
CSV_DECIMALS = 6


def load_frame(path, timestamp_index: int = 0) -> ThermalFrame:
    """Load one frame, sniffing binary vs CSV by the magic bytes."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == BINARY_MAGIC:
        return _load_frame_binary(path, timestamp_index)
    return _load_frame_csv(path, timestamp_index)


def _load_frame_csv(path: Path, timestamp_index: int) -> ThermalFrame:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise FrameFormatError(
                    f"{path}: line {lineno}: expected {width} values, got {len(cells)}"
                )
            row = []
            for colno, cell in enumerate(cells, start=1):
                try:
                    row.append(float(cell))
                except ValueError:
                    raise FrameFormatError(
                        f"{path}: line {lineno}, column {colno}: "
                        f"non-numeric cell {cell!r}"
                    ) from None
            rows.append(row)
    if not rows:
        raise FrameFormatError(f"{path}: no data rows")
    data = np.array(rows, dtype=np.float64)
    _check_range(data, path)
    return ThermalFrame(data=data, timestamp_index=timestamp_index)


def _load_frame_binary(path: Path, timestamp_index: int) -> ThermalFrame:
    raw = path.read_bytes()
    if len(raw) < 12:
        raise FrameFormatError(f"{path}: truncated binary header")
    width, height = struct.unpack_from("<II", raw, 4)
    expected = 12 + width * height * 8
    if len(raw) != expected:
        raise FrameFormatError(
            f"{path}: payload size {len(raw)} != expected {expected} "
            f"for {width}x{height}"
        )
    data = np.frombuffer(raw, dtype="<f8", offset=12).reshape(height, width)
    if not np.all(np.isfinite(data)):
        raise FrameFormatError(f"{path}: non-finite values in binary frame")
    _check_range(data, path)
    return ThermalFrame(data=np.asarray(data, dtype=np.float64),
                        timestamp_index=timestamp_index)


def _check_range(data: np.ndarray, path: Path) -> None:
    if data.min() < TEMP_MIN_C or data.max() > TEMP_MAX_C:
        bad = float(data.min()) if data.min() < TEMP_MIN_C else float(data.max())
        raise FrameRangeError(
            f"{path}: value {bad} outside plausibility window "
            f"[{TEMP_MIN_C}, {TEMP_MAX_C}] degC"
        )


def write_frame(frame: ThermalFrame, path, fmt: str = "csv") -> None:
    """Write a frame as CSV (6 decimals) or the TPF1 binary format."""
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {frame.width}x{frame.height} frame, degC\n")
            for row in frame.data:
                fh.write(",".join(f"{v:.{CSV_DECIMALS}f}" for v in row))
                fh.write("\n")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<II", frame.width, frame.height))
            fh.write(np.ascontiguousarray(frame.data, dtype="<f8").tobytes())
    else:
        raise ParameterError(f"unknown frame format {fmt!r}")


@dataclass(frozen=True)
class SessionManifest:
    """Parsed session manifest; paths resolved relative to the manifest."""

    subject_id: str
    ambient_c: float
    relative_humidity: float
    frame_files: dict[SetLabel, tuple[Path, ...]]
    roi_set: RoiSet
    variant: ModelVariant = ModelVariant.FULL
    output_scale: float | None = None
    sensitivity_threshold: float = DEFAULT_SENSITIVITY_C
    bin_count: int = 256
    pairing: PairingPolicy = PairingPolicy.BLOCK

    def model_parameters(self) -> ModelParameters:
        return ModelParameters(
            T_e=celsius_to_kelvin(self.ambient_c),
            variant=self.variant,
            output_scale=self.output_scale,
        )


_REQUIRED_KEYS = ("subject_id", "environment", "sets", "rois")


def load_manifest(path) -> SessionManifest:
    """Parse and validate a JSON session manifest."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: cannot parse manifest: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise ManifestError(f"{path}: missing manifest key(s): {missing}")

    env = doc["environment"]
    try:
        ambient = float(env["ambient_c"])
        humidity = float(env.get("relative_humidity", 0.0))
    except (TypeError, KeyError, ValueError) as exc:
        raise ManifestError(f"{path}: bad environment block: {exc}") from exc

    base = path.parent
    frame_files: dict[SetLabel, tuple[Path, ...]] = {}
    sets = doc["sets"]
    for label, key in ((SetLabel.BASELINE, "baseline"),
                       (SetLabel.NEGATIVE, "negative"),
                       (SetLabel.POSITIVE, "positive")):
        if key not in sets:
            raise ManifestError(f"{path}: sets.{key} missing")
        entry = sets[key]
        if isinstance(entry, dict) and "dir" in entry:
            directory = base / entry["dir"]
            if not directory.is_dir():
                raise ManifestError(f"{path}: sets.{key}: no such directory {directory}")
            files = [p for p in directory.iterdir() if p.is_file()]
        elif isinstance(entry, dict) and "files" in entry:
            files = [base / f for f in entry["files"]]
        elif isinstance(entry, list):
            files = [base / f for f in entry]
        else:
            raise ManifestError(f"{path}: sets.{key} must list files or name a dir")
        # bytewise-lexicographic order keeps frame sequence deterministic
        files.sort(key=lambda p: p.name.encode("utf-8"))
        for f in files:
            if not f.is_file():
                raise SessionError(f"{path}: sets.{key}: missing frame file {f}")
        if not files:
            raise SessionError(f"{path}: sets.{key} contains no frames")
        frame_files[label] = tuple(files)

    rects = []
    include_total = False
    for spec in doc["rois"]:
        try:
            name = RoiName(spec["name"])
        except (KeyError, ValueError) as exc:
            raise ManifestError(f"{path}: bad ROI entry {spec!r}: {exc}") from exc
        if name is RoiName.TOTAL_FACE:
            include_total = True
            continue
        try:
            rects.append(RoiRect(name=name, row=int(spec["row"]), col=int(spec["col"]),
                                 rows=int(spec["rows"]), cols=int(spec["cols"])))
        except (KeyError, ValueError, ParameterError) as exc:
            raise ManifestError(f"{path}: bad ROI entry {spec!r}: {exc}") from exc
    roi_set = RoiSet(rects=tuple(rects), include_total_face=include_total or not rects)

    model = doc.get("model", {})
    try:
        variant = ModelVariant(model.get("variant", "full"))
        scale = model.get("output_scale")
        scale = float(scale) if scale is not None else None
        sensitivity = float(model.get("sensitivity_threshold", DEFAULT_SENSITIVITY_C))
        bin_count = int(model.get("bin_count", 256))
        pairing = PairingPolicy(doc.get("pairing", "block"))
    except (ValueError, TypeError) as exc:
        raise ManifestError(f"{path}: bad model/pairing settings: {exc}") from exc

    return SessionManifest(
        subject_id=str(doc["subject_id"]),
        ambient_c=ambient,
        relative_humidity=humidity,
        frame_files=frame_files,
        roi_set=roi_set,
        variant=variant,
        output_scale=scale,
        sensitivity_threshold=sensitivity,
        bin_count=bin_count,
        pairing=pairing,
    )


def load_session(manifest_path) -> tuple[SessionData, SessionManifest, list[str]]:
    """Load every frame named by the manifest into a SessionData.

    Returns (session, manifest, warnings); deviations from the nominal
    60/240/240 set sizes warn rather than fail.
    """
    manifest = load_manifest(manifest_path)
    warnings: list[str] = []
    sequences: dict[SetLabel, tuple[ThermalFrame, ...]] = {}
    for label, files in manifest.frame_files.items():
        frames = tuple(load_frame(f, timestamp_index=i) for i, f in enumerate(files))
        shapes = {f.data.shape for f in frames}
        if len(shapes) != 1:
            raise SessionError(
                f"{label.value}: mixed frame dimensions {sorted(shapes)}"
            )
        nominal = NOMINAL_SET_SIZES[label]
        if len(frames) != nominal:
            warnings.append(
                f"{label.value}: {len(frames)} frames (nominal {nominal})"
            )
        sequences[label] = frames
    shapes = {seq[0].data.shape for seq in sequences.values()}
    if len(shapes) != 1:
        raise SessionError(f"mixed frame dimensions across sets: {sorted(shapes)}")
    session = SessionData(
        subject_id=manifest.subject_id,
        baseline=sequences[SetLabel.BASELINE],
        negative=sequences[SetLabel.NEGATIVE],
        positive=sequences[SetLabel.POSITIVE],
        roi_set=manifest.roi_set,
        ambient_c=manifest.ambient_c,
        relative_humidity=manifest.relative_humidity,
    )
    return session, manifest, warnings

"""Command-line entry point: segment, perfuse, analyze, synth subcommands.

Exit codes: 0 success, 2 segmentation failure (degenerate histogram or
empty face class), 1 any other error. Errors go to stderr prefixed
"error:". Identical inputs always produce byte-identical outputs;
--threads changes wall time only.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DegenerateHistogramError, SegmentationError, ThermoPerfusionError
from .ingest import load_frame, load_session, write_frame
from .model import ModelParameters, ModelVariant, PerfusionFrame, celsius_to_kelvin
from .perfusion import perfuse_frame
from .pipeline import analyze_session, write_report_bundle
from .report import write_heatmap, write_mask_pgm
from .segmentation import DEFAULT_BIN_COUNT, segment_face
from .stats import DEFAULT_SENSITIVITY_C, PairingPolicy
from .synth import session_spec_from_json, synth_session


def _is_manifest(path: Path) -> bool:
    return path.suffix.lower() == ".json"


def _model_params(args, ambient_c: float | None = None) -> ModelParameters:
    variant = ModelVariant.TABLE_CONSISTENT if args.variant == "table" else ModelVariant.FULL
    ambient = args.ambient if getattr(args, "ambient", None) is not None else ambient_c
    kwargs = {"variant": variant, "output_scale": args.scale}
    if ambient is not None:
        kwargs["T_e"] = celsius_to_kelvin(ambient)
    return ModelParameters(**kwargs)


def cmd_segment(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    src = Path(args.input)
    if _is_manifest(src):
        session, _, warnings = load_session(src)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        count = 0
        for label, frames in session.sets().items():
            for i, frame in enumerate(frames):
                mask = segment_face(frame, args.bins, args.largest_component)
                write_mask_pgm(mask, out / f"mask_{label.value.lower()}_{i:04d}.pgm")
                count += 1
        print(f"wrote {count} masks to {out}")
    else:
        frame = load_frame(src)
        mask = segment_face(frame, args.bins, args.largest_component)
        dest = out / (src.stem + "_mask.pgm")
        write_mask_pgm(mask, dest)
        print(f"wrote {dest} ({mask.pixel_count} face pixels)")
    return 0


def _perfuse_one(frame, args, params, out: Path, stem: str) -> None:
    mask = segment_face(frame, args.bins, args.largest_component)
    pframe, issues = perfuse_frame(frame, mask, params)
    write_frame_like = out / f"{stem}_perfusion.csv"
    _write_perfusion_csv(pframe, write_frame_like)
    write_heatmap(pframe, out / f"{stem}_perfusion.pgm", mask=mask)
    if args.colormap:
        write_heatmap(pframe, out / f"{stem}_perfusion.ppm", mask=mask, colormap=True)
    if issues:
        print(f"warning: {stem}: {len(issues)} pixel(s) flagged and zeroed",
              file=sys.stderr)


def _write_perfusion_csv(pframe: PerfusionFrame, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {pframe.width}x{pframe.height} perfusion frame, kg/(m^2 s)\n")
        for row in pframe.data:
            fh.write(",".join(f"{v:.9e}" for v in row))
            fh.write("\n")


def cmd_perfuse(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    src = Path(args.input)
    if _is_manifest(src):
        session, manifest, warnings = load_session(src)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        params = _model_params(args, ambient_c=manifest.ambient_c)
        for label, frames in session.sets().items():
            for i, frame in enumerate(frames):
                _perfuse_one(frame, args, params, out,
                             f"{label.value.lower()}_{i:04d}")
    else:
        frame = load_frame(src)
        params = _model_params(args)
        _perfuse_one(frame, args, params, out, src.stem)
    print(f"perfusion outputs written to {out}")
    return 0


def cmd_analyze(args) -> int:
    session, manifest, warnings = load_session(Path(args.manifest))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    variant = manifest.variant if args.variant is None else (
        ModelVariant.TABLE_CONSISTENT if args.variant == "table" else ModelVariant.FULL)
    scale = manifest.output_scale if args.scale is None else args.scale
    params = ModelParameters(
        T_e=celsius_to_kelvin(manifest.ambient_c),
        variant=variant, output_scale=scale)
    sensitivity = (manifest.sensitivity_threshold
                   if args.sensitivity is None else args.sensitivity)
    bins = manifest.bin_count if args.bins is None else args.bins
    pairing = manifest.pairing if args.pairing is None else PairingPolicy(args.pairing)
    result = analyze_session(
        session, params=params, bin_count=bins,
        sensitivity_threshold=sensitivity, pairing=pairing,
        threads=args.threads, warnings=tuple(warnings))
    written = write_report_bundle(result, args.out)
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_synth(args) -> int:
    doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    spec = session_spec_from_json(doc)
    manifest_path = synth_session(spec, args.out)
    print(f"wrote session manifest {manifest_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoperfusion",
        description="Facial thermal recordings to blood-perfusion analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p, with_defaults: bool):
        p.add_argument("--variant", choices=["full", "table"],
                       default="full" if with_defaults else None,
                       help="perfusion model variant")
        p.add_argument("--scale", type=float, default=None,
                       help="output scale (default 1 for full, 10 for table)")

    p = sub.add_parser("segment", help="write face masks as PGM")
    p.add_argument("input", help="frame file or session manifest (.json)")
    p.add_argument("--bins", type=int, default=DEFAULT_BIN_COUNT)
    p.add_argument("--largest-component", action="store_true")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("perfuse", help="write perfusion frames and heatmaps")
    p.add_argument("input", help="frame file or session manifest (.json)")
    add_model_flags(p, with_defaults=True)
    p.add_argument("--ambient", type=float, default=None,
                   help="ambient temperature degC (default 24 or manifest value)")
    p.add_argument("--bins", type=int, default=DEFAULT_BIN_COUNT)
    p.add_argument("--largest-component", action="store_true")
    p.add_argument("--colormap", action="store_true", help="also write PPM")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_perfuse)

    p = sub.add_parser("analyze", help="full report bundle from a session")
    p.add_argument("manifest")
    add_model_flags(p, with_defaults=False)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--sensitivity", type=float, default=None,
                   help=f"temperature gate degC (default {DEFAULT_SENSITIVITY_C})")
    p.add_argument("--pairing", choices=["block", "truncate"], default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a synthetic session")
    p.add_argument("spec", help="JSON synthetic-session spec")
    p.add_argument("--out", default="synthetic-session")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DegenerateHistogramError, SegmentationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ThermoPerfusionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: analyze a single image, run a session, serve the API.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import socket
import sys
from pathlib import Path

from . import io as fio
from .pipeline import MosaicAnalyzer
from .session import Session, SessionConfig


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract reserves 2 for runtime
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _levels(value: str) -> int:
    n = int(value)
    if n < 2:
        raise argparse.ArgumentTypeError("levels must be >= 2")
    return n


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fieldscout", description="Uncommonness-driven science-target scouting.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="run the interest pipeline on one image")
    a.add_argument("input", help="PNG or binary PPM image")
    a.add_argument("--levels", type=_levels, default=64, help="quantization levels per channel")
    a.add_argument("--blur", type=_positive_int, default=10, help="interest blur width in pixels")
    a.add_argument("--top", type=_positive_int, default=3, help="number of interest points")
    a.add_argument("--out", default="fieldscout-analysis", help="artifact output directory")

    s = sub.add_parser("session", help="run a full exploration session headlessly")
    s.add_argument("config", help="session config (JSON or TOML)")
    s.add_argument("--mode", choices=["autonomous", "interactive"], default=None,
                   help="override the config's mode (headless runs must be autonomous)")
    s.add_argument("--out", default="fieldscout-session", help="archive root directory")

    v = sub.add_parser("serve", help="serve the interactive session API")
    v.add_argument("--port", type=int, default=8000)
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--scene-dir", required=True, help="directory of scene descriptors (*.json)")
    v.add_argument("--archive-dir", default="fieldscout-archives")
    v.add_argument("--ui-dir", default=None, help="built web UI to mount at /ui")
    return p


def cmd_analyze(args) -> int:
    path = Path(args.input)
    if not path.exists():
        print(f"fieldscout: input image not found: {path}", file=sys.stderr)
        return 2
    image = fio.load_image(path)
    analyzer = MosaicAnalyzer(levels=args.levels, blur_width=args.blur, top_k=args.top).fit()
    result = analyzer.analyze(image)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for ch, plane in result.hsi.planes.items():
        fio.save_plane_png(plane, out / f"mosaic_{ch}.png")
    for ch, seg in result.segmentations.items():
        fio.save_segmentation_png(seg, out / f"seg_{ch}.png")
    for ch, unc in result.uncommon.items():
        fio.save_map_png(unc, out / f"uncommon_{ch}.png")
    fio.save_map_png(result.interest_raw, out / "interest_raw.png")
    fio.save_map_png(result.interest_blur, out / "interest_blur.png")
    fio.dump_json({"points": [p.to_dict() for p in result.points]}, out / "points.json")
    report = {
        "input": str(path),
        "parameters": analyzer.get_params(),
        "width": result.width,
        "height": result.height,
        "points": [p.to_dict() for p in result.points],
        "classes": {
            ch: {"areas": {str(k): v for k, v in seg.class_areas.items()}, "rank": list(seg.rank)}
            for ch, seg in result.segmentations.items()
        },
    }
    fio.dump_json(report, out / "report.json")
    fio.write_manifest(out, extra={"parameters": analyzer.get_params()})

    print(f"analyzed {path} ({result.width}x{result.height})")
    for p in result.points:
        print(f"  rank {p.rank} ({p.color:5s}) at ({p.x}, {p.y})  score {p.score:.3f}")
    if not result.points:
        print("  no interest points found")
    print(f"artifacts written to {out}")
    return 0


def cmd_session(args) -> int:
    cfg_path = Path(args.config)
    if not cfg_path.exists():
        print(f"fieldscout: config not found: {cfg_path}", file=sys.stderr)
        return 2
    config = SessionConfig.from_file(cfg_path)
    if args.mode is not None:
        config.mode = args.mode
    if config.mode == "interactive":
        print(
            "fieldscout: interactive sessions need the service; run `fieldscout serve` "
            "and drive the session over the API",
            file=sys.stderr,
        )
        return 1
    if not config.scene:
        print("fieldscout: config names no scene", file=sys.stderr)
        return 2
    scene_path = Path(config.scene)
    if not scene_path.is_absolute():
        scene_path = cfg_path.parent / scene_path
    if not scene_path.exists():
        print(f"fieldscout: scene not found: {scene_path}", file=sys.stderr)
        return 2
    config.scene = str(scene_path)

    session = Session(config, archive_root=args.out)
    session.run_autonomous()

    print(f"session done ({session.done_reason}); archive at {args.out}")
    print(f"{'step':>4}  {'distance':>9}  {'points':>6}  chosen")
    for step in session.steps:
        chosen = step.chosen["action"] if step.chosen else "-"
        print(f"{step.index:>4}  {step.distance:>8.1f}m  {len(step.points):>6}  {chosen}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    scene_dir = Path(args.scene_dir)
    if not scene_dir.is_dir():
        print(f"fieldscout: scene directory not found: {scene_dir}", file=sys.stderr)
        return 2
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"fieldscout: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 2
    finally:
        probe.close()

    app = create_app(scene_dir=scene_dir, archive_root=args.archive_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"analyze": cmd_analyze, "session": cmd_session, "serve": cmd_serve}[args.command]
    try:
        return handler(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # runtime failures map to exit 2
        print(f"fieldscout: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

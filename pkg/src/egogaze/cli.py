"""Command-line surface: predict, segment, eval, bench, serve.

A thin client over the pipeline and evaluation kit. stdout carries only
machine-readable results; every diagnostic and summary goes to stderr.
Exit codes: 0 success, 1 configuration/schema errors, 2 I/O and decode
errors.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import formats
from .errors import (ConfigError, DecodeError, EgoGazeError,
                     EmptyEvaluationError, GeometryError, SchemaError)
from .evalkit import CameraModel, aae, segmentation_accuracy
from .features import Frame
from .pipeline import (GazePipeline, RunConfig, load_config_file,
                       process_stream)
from .temporal import heatmap_image

_CONFIG_EXIT = 1
_IO_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_CONFIG_EXIT, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="egogaze",
                     description="Surprise-driven gaze prediction and event "
                                 "segmentation for egocentric video")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_stream_flags(p, seed=False):
        p.add_argument("--frames", required=True,
                       help="directory of .ppm frames, or '-' for a RAWVIDEO "
                            "stream on stdin")
        p.add_argument("--grid", type=int, default=None, help="grid side N")
        p.add_argument("--fps", type=float, default=None,
                       help="frames per second (sets the temporal window)")
        p.add_argument("--config", default=None,
                       help="flat key = value config file; flags override it")
        if seed:
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("predict", help="stream gaze predictions to a CSV")
    add_stream_flags(p, seed=True)
    p.add_argument("--heatmaps", default=None,
                   help="directory for per-frame PGM surprise heatmaps")
    p.add_argument("--out", required=True, help="gaze CSV output path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("segment", help="stream event boundaries to JSON")
    add_stream_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="gating threshold in running std-devs")
    p.add_argument("--min-len", dest="min_len", type=int, default=None,
                   help="minimum frames between boundaries")
    p.add_argument("--out", required=True, help="events JSON output path")
    p.add_argument("--energies", default=None,
                   help="optional per-frame energy CSV output path")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    esub = p.add_subparsers(dest="metric", required=True)

    pa = esub.add_parser("aae", help="average angular error in degrees")
    pa.add_argument("--pred", required=True)
    pa.add_argument("--gt", required=True)
    pa.add_argument("--width", type=int, required=True)
    pa.add_argument("--height", type=int, required=True)
    pa.add_argument("--fov", type=float, default=60.0,
                    help="horizontal field of view in degrees")
    pa.set_defaults(func=cmd_eval_aae)

    ps = esub.add_parser("seg", help="Hungarian-aligned segmentation accuracy")
    ps.add_argument("--boundaries", required=True, help="events JSON")
    ps.add_argument("--features", required=True,
                    help="per-frame feature matrix (CSV or FEAT32)")
    ps.add_argument("--gt", required=True, help="frame,label CSV")
    ps.add_argument("--k", type=int, required=True, help="number of classes")
    ps.add_argument("--per-video", dest="per_video", default=None,
                    help="manifest of video_id,start_frame,end_frame ranges")
    ps.add_argument("--seed", type=int, default=None, help="k-means seed")
    ps.set_defaults(func=cmd_eval_seg)

    p = sub.add_parser("bench", help="measure single-threaded throughput")
    add_stream_flags(p)
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def _resolve_config(args) -> RunConfig:
    """Defaults < SURPRISE_SEED < config file < explicit flags."""
    cfg = RunConfig()
    env_seed = os.environ.get("SURPRISE_SEED")
    if env_seed is not None:
        try:
            cfg = replace(cfg, seed=int(env_seed))
        except ValueError:
            raise ConfigError(
                f"SURPRISE_SEED must be an integer, got {env_seed!r}")
    if getattr(args, "config", None):
        cfg = load_config_file(args.config, cfg)
    overrides = {}
    for flag, field in (("grid", "grid"), ("fps", "fps"), ("seed", "seed"),
                        ("lam", "lam"), ("min_len", "min_event_len")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.window  # fail fast on an unusable fps/k combination
    return cfg


def _dir_frames(path: Path, need_flow: bool):
    files = sorted(path.glob("*.ppm"))
    if not files:
        raise DecodeError(f"{path}: no .ppm frames found")
    dims = None
    for index, f in enumerate(files):
        width, height, pixels = formats.read_ppm(f)
        if dims is None:
            dims = (width, height)
        elif (width, height) != dims:
            raise DecodeError(
                f"{f}: dimensions {width}x{height} differ from first frame "
                f"{dims[0]}x{dims[1]}")
        flow = formats.read_flo32(f.with_suffix(".flo32")) if need_flow else None
        yield Frame(width=width, height=height, pixels=pixels, index=index,
                    flow=flow)


def _open_source(args, cfg: RunConfig):
    """Returns (config, frame iterator) for a --frames argument."""
    need_flow = cfg.scheme().include_flow
    if args.frames == "-":
        if need_flow:
            raise ConfigError("flow features are not supported on RAWVIDEO "
                              "streams; use an image directory with .flo32 "
                              "sidecars")
        stream = sys.stdin.buffer
        width, height, fps = formats.read_rawvideo_header(stream)
        if args.fps is None:
            cfg = replace(cfg, fps=fps)

        def gen():
            for index, payload in enumerate(
                    formats.iter_rawvideo_frames(stream, width, height)):
                yield Frame(width=width, height=height, pixels=payload,
                            index=index)
        return cfg, gen()
    path = Path(args.frames)
    if not path.is_dir():
        raise DecodeError(f"{path}: not a directory")
    return cfg, _dir_frames(path, need_flow)


def cmd_predict(args) -> int:
    cfg = _resolve_config(args)
    cfg, frames = _open_source(args, cfg)
    heat_dir = None
    if args.heatmaps:
        heat_dir = Path(args.heatmaps)
        heat_dir.mkdir(parents=True, exist_ok=True)
    energy_params = cfg.energy_params()

    with open(args.out, "w", encoding="utf-8", newline="") as out:
        out.write(formats.GAZE_OUT_HEADER + "\n")

        def sink(frame_out):
            out.write(formats.format_gaze_row(frame_out.prediction) + "\n")
            if heat_dir is not None:
                image = heatmap_image(frame_out.surprise, energy_params)
                formats.write_pgm(
                    heat_dir / f"{frame_out.prediction.frame_index:06d}.pgm",
                    image)

        summary = process_stream(cfg, frames, sink)
    print(f"frames={summary.frames} fps={summary.fps:.2f}", file=sys.stderr)
    return 0


def cmd_segment(args) -> int:
    cfg = _resolve_config(args)
    cfg, frames = _open_source(args, cfg)
    boundaries = []
    energies_out = open(args.energies, "w", encoding="utf-8",
                        newline="") if args.energies else None
    try:
        if energies_out is not None:
            energies_out.write(formats.ENERGIES_HEADER + "\n")

        def sink(frame_out):
            if frame_out.boundary is not None:
                boundaries.append(frame_out.boundary)
            if energies_out is not None:
                energies_out.write(
                    f"{frame_out.prediction.frame_index},"
                    f"{frame_out.config_energy:.6f}\n")

        summary = process_stream(cfg, frames, sink)
    finally:
        if energies_out is not None:
            energies_out.close()
    formats.write_events_json(args.out, boundaries)
    print(f"frames={summary.frames} boundaries={summary.boundaries} "
          f"fps={summary.fps:.2f}", file=sys.stderr)
    return 0


def cmd_eval_aae(args) -> int:
    pred = formats.read_gaze_records(args.pred)
    truth = formats.read_gaze_records(args.gt)
    cam = CameraModel(width=args.width, height=args.height,
                      hfov_degrees=args.fov)
    value = aae(pred, truth, cam)
    print(f"aae_degrees={value:.4f}")
    return 0


def cmd_eval_seg(args) -> int:
    boundaries = formats.read_events_json(args.boundaries)
    features = formats.read_features(args.features)
    labels = formats.read_labels_csv(args.gt)
    videos = None
    if args.per_video:
        videos = [(start, end) for _, start, end
                  in formats.read_manifest(args.per_video)]
    seed = args.seed
    if seed is None:
        env_seed = os.environ.get("SURPRISE_SEED")
        seed = int(env_seed) if env_seed is not None else RunConfig().seed
    value = segmentation_accuracy(boundaries, features, labels, args.k, seed,
                                  videos)
    print(f"seg_accuracy={value:.4f}")
    return 0


def cmd_bench(args) -> int:
    if args.frames == "-":
        raise ConfigError("bench needs a frame directory, not a stream")
    cfg = _resolve_config(args)
    if args.repeat < 1:
        raise ConfigError(f"--repeat must be >= 1, got {args.repeat}")
    path = Path(args.frames)
    if not path.is_dir():
        raise DecodeError(f"{path}: not a directory")
    files = sorted(path.glob("*.ppm"))
    if not files:
        raise DecodeError(f"{path}: no .ppm frames found")
    blobs = [f.read_bytes() for f in files]

    rates = []
    for _ in range(args.repeat):
        pipeline = GazePipeline(cfg)
        start = time.perf_counter()
        for index, blob in enumerate(blobs):
            width, height, pixels = formats.decode_ppm(blob)
            pipeline.process_frame(Frame(width=width, height=height,
                                         pixels=pixels, index=index))
        elapsed = time.perf_counter() - start
        rates.append(len(blobs) / elapsed if elapsed > 0 else 0.0)

    print(f"fps_min={min(rates):.2f}")
    print(f"fps_median={statistics.median(rates):.2f}")
    print(f"fps_max={max(rates):.2f}")
    print(f"frames={len(blobs)} repeats={args.repeat}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse help/usage paths
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, GeometryError,
            EmptyEvaluationError) as exc:
        print(f"egogaze: error: {exc}", file=sys.stderr)
        return _CONFIG_EXIT
    except (EgoGazeError, OSError) as exc:
        print(f"egogaze: error: {exc}", file=sys.stderr)
        return _IO_EXIT


if __name__ == "__main__":
    sys.exit(main())

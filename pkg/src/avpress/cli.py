"""Command-line surface: compress, gen-synth, eval-retrieval, init-weights, inspect.

Exit codes follow convention: 0 on success, 2 for usage errors (argparse),
1 for runtime failures (bad files, dimension mismatches, infeasible specs).
CLI flags override config-file values, which override built-in defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import evalkit, pipeline, stream_io
from .core import Mode
from .predictor import init_weights


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _cmd_compress(args: argparse.Namespace) -> int:
    stream = stream_io.read_stream(args.input)
    weights = stream_io.read_weights(args.weights)
    cfg = stream_io.load_config(
        args.config,
        overrides={
            "rho_sem": args.rho_sem,
            "rho_spa": args.rho_spa,
            "tau_merge": args.tau_merge,
            "mode": args.mode,
        },
    )
    result = pipeline.compress(
        stream,
        weights,
        cfg,
        segmentation=args.segmentation,
        merge_reduce=args.merge_reduce,
        workers=args.workers,
    )
    stream_io.write_compressed(result.compressed, args.output)
    stats = result.stats
    payload = {
        "original_video_tokens": stats.original_video_tokens,
        "retained_video_tokens": stats.retained_video_tokens,
        "original_audio_tokens": stats.original_audio_tokens,
        "video_compression": stats.video_compression,
        "total_compression": stats.total_compression,
        "video_compression_pct": round(100.0 * stats.video_compression, 2),
        "total_compression_pct": round(100.0 * stats.total_compression, 2),
        "segments": stats.segments,
        "merges": stats.merges,
        "zero_norm_warnings": stats.zero_norm_warnings,
        "mode": cfg.mode.value,
        "survivors": list(result.survivors) if result.survivors is not None else None,
    }
    if args.stats:
        _write_json(args.stats, payload)
    print(
        f"compressed {stats.original_video_tokens} video tokens to "
        f"{stats.retained_video_tokens} ({payload['video_compression_pct']}% video, "
        f"{payload['total_compression_pct']}% total) across {stats.segments} segments, "
        f"{stats.merges} merges"
    )
    return 0


def _load_synth_spec(path) -> evalkit.SynthSpec:
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: synth spec must be a JSON object")
    known = {f.name for f in dataclasses.fields(evalkit.SynthSpec)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown synth spec keys {sorted(unknown)}")
    raw = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()}
    return evalkit.SynthSpec(**raw)


def _cmd_gen_synth(args: argparse.Namespace) -> int:
    spec = _load_synth_spec(args.spec) if args.spec else evalkit.default_benchmark_spec()
    stream, truth = evalkit.gen_synthetic(spec)
    stream_io.write_stream(stream, args.output)
    if args.truth:
        _write_json(
            args.truth,
            {
                "marker_positions": list(truth.marker_positions),
                "scene_changes": list(truth.scene_changes),
                "semantic_directions": truth.semantic_directions.tolist(),
                "audio_directions": truth.audio_directions.tolist(),
            },
        )
    print(f"wrote {len(stream)} chunks to {args.output}")
    return 0


def _cmd_eval_retrieval(args: argparse.Namespace) -> int:
    audio = np.load(args.audio)
    video = np.load(args.video)
    report = evalkit.retrieval_eval(audio, video)
    payload = {
        "recall_at_1": report.recall_at_1,
        "recall_at_5": report.recall_at_5,
        "median_rank": report.median_rank,
    }
    if args.report:
        _write_json(args.report, payload)
    print(json.dumps(payload))
    return 0


def _cmd_init_weights(args: argparse.Namespace) -> int:
    weights = init_weights(
        args.seed, Q=args.q, d_h=args.d_h, d_a=args.d_a, d=args.d, layers=args.layers
    )
    stream_io.write_weights(weights, args.output)
    print(f"wrote weights {weights.dims} to {args.output}")
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    header = stream_io.read_stream_header(args.input)
    stream = stream_io.read_stream(args.input)
    print(
        f"AVTS v{stream_io.FORMAT_VERSION}: T={header.t} F={header.frames} "
        f"H={header.height} W={header.width} d={header.dim} "
        f"L={header.audio_tokens} d_a={header.audio_dim} flags={header.flags:#x}"
    )
    for t, (visual, audio) in enumerate(stream.chunks):
        v_norm = float(np.linalg.norm(visual.embeddings.astype(np.float64), axis=1).mean())
        a_norm = float(np.linalg.norm(audio.embeddings.astype(np.float64), axis=1).mean())
        print(f"chunk {t}: mean visual row norm {v_norm:.6f}, mean audio row norm {a_norm:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avpress",
        description="Audio-guided token compression for interleaved audio-visual streams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress an AVTS stream")
    p.add_argument("--input", required=True, help="AVTS stream to compress")
    p.add_argument("--weights", required=True, help="A2VW predictor weights")
    p.add_argument("--config", default=None, help="JSON pipeline config")
    p.add_argument("--output", required=True, help="AVTZ output path")
    p.add_argument("--stats", default=None, help="JSON stats output path")
    p.add_argument("--rho-sem", type=float, default=None, dest="rho_sem")
    p.add_argument("--rho-spa", type=float, default=None, dest="rho_spa")
    p.add_argument("--tau-merge", type=float, default=None, dest="tau_merge")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    p.add_argument(
        "--segmentation", choices=["depth", "fixed"], default="depth",
        help="'fixed' is the 3-chunk-window ablation baseline",
    )
    p.add_argument(
        "--merge-reduce", choices=["mean", "first"], default="mean", dest="merge_reduce",
        help="'first' is the whole-chunk-pruning ablation baseline",
    )
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("gen-synth", help="generate a synthetic AVTS stream")
    p.add_argument("--spec", default=None, help="JSON synth spec (default: benchmark spec)")
    p.add_argument("--output", required=True, help="AVTS output path")
    p.add_argument("--truth", default=None, help="JSON ground-truth output path")
    p.set_defaults(func=_cmd_gen_synth)

    p = sub.add_parser("eval-retrieval", help="audio-to-video retrieval metrics")
    p.add_argument("--audio", required=True, help=".npy audio-side matrix (N x d)")
    p.add_argument("--video", required=True, help=".npy video-side matrix (N x d)")
    p.add_argument("--report", default=None, help="JSON report output path")
    p.set_defaults(func=_cmd_eval_retrieval)

    p = sub.add_parser("init-weights", help="write reproducible predictor weights")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--q", type=int, default=128)
    p.add_argument("--d-h", type=int, default=256, dest="d_h")
    p.add_argument("--d-a", type=int, default=128, dest="d_a")
    p.add_argument("--d", type=int, default=256)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--output", required=True, help="A2VW output path")
    p.set_defaults(func=_cmd_init_weights)

    p = sub.add_parser("inspect", help="print stream header and per-chunk norms")
    p.add_argument("--input", required=True, help="AVTS stream to inspect")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI failure funnel
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

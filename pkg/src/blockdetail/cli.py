"""Batch command line: dataset synthesis, training, generation,
benchmarking, the cadence ablation, metrics, and the HTTP service.

Exit codes: 0 success, 1 validation/runtime failure (single-line
"error: <message>" on stderr), 2 usage errors (argparse).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import BenchmarkSpec, ablate_n, make_blocking, run_benchmark
from .detailing import RefinementConfig, trace_to_doc
from .jobs import GenerationRequest, JobManager, execute_request
from .metrics import fid, footskate, jitter, keyframe_error
from .motion_io import (dumps_canonical, load_blocking, load_motion,
                        save_blocking, save_motion)
from .net import NetDenoiserR, NetDenoiserU, load_checkpoint, save_checkpoint
from .skeleton import DEFAULT_SKELETON
from .strategies import StrategyDescriptor, parse_strategy
from .synth import KINDS, synth_motion
from .training import TrainConfig, train_denoiser, training_pairs

CONFIG_VERSION = 1


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != CONFIG_VERSION:
        raise ValueError(f"config file must carry format_version {CONFIG_VERSION}")
    return doc


def _refinement_from_doc(doc: dict) -> RefinementConfig:
    ref = doc.get("refinement", {})
    return RefinementConfig(
        cadence=int(ref.get("cadence", RefinementConfig.cadence)),
        search_radius=int(ref.get("search_radius", RefinementConfig.search_radius)),
        apply_ground_fix=bool(ref.get("apply_ground_fix", RefinementConfig.apply_ground_fix)),
        default_tolerance=float(ref.get("default_tolerance", RefinementConfig.default_tolerance)),
    )


def _load_models(args) -> tuple[NetDenoiserR, NetDenoiserU]:
    net_r, _ = load_checkpoint(args.model_r)
    net_u, _ = load_checkpoint(args.model_u)
    return NetDenoiserR(net_r), NetDenoiserU(net_u)


def _load_dataset_dir(path: str) -> list:
    index = Path(path) / "index.json"
    if index.exists():
        names = json.loads(index.read_text())["clips"]
        files = [Path(path) / n for n in names]
    else:
        files = sorted(Path(path).glob("*.json"))
    if not files:
        raise ValueError(f"no motion files found under {path}")
    return [load_motion(f) for f in files]


def cmd_synth_data(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kinds = args.kinds.split(",") if args.kinds else list(KINDS)
    for kind in kinds:
        if kind not in KINDS:
            raise ValueError(f"unknown motion kind {kind!r}")
    names = []
    for i in range(args.count):
        kind = kinds[i % len(kinds)]
        motion = synth_motion(kind, args.frames, args.seed + i)
        name = f"clip_{i:04d}_{kind}.json"
        save_motion(motion, out / name)
        names.append(name)
    (out / "index.json").write_text(dumps_canonical({"clips": names, "seed": args.seed}))
    print(f"wrote {len(names)} clips to {out}")
    return 0


def cmd_train(args) -> int:
    cfg_doc = _load_config_file(args.config).get("training", {})
    clips = _load_dataset_dir(args.data)
    pairs = training_pairs(clips, args.seed + 50_000)
    config = TrainConfig(
        mode=args.mode,
        hidden=int(cfg_doc.get("hidden", args.hidden)),
        depth=int(cfg_doc.get("depth", args.depth)),
        steps=int(cfg_doc.get("steps", args.steps)),
        batch_size=int(cfg_doc.get("batch_size", args.batch_size)),
        learning_rate=float(cfg_doc.get("learning_rate", args.learning_rate)),
        diffusion_steps=int(cfg_doc.get("diffusion_steps", args.diffusion_steps)),
        seed=args.seed,
    )
    result = train_denoiser(pairs, config)
    save_checkpoint(args.out, result.net, result.training_echo())
    print(f"trained {args.mode} model: final loss {result.final_loss:.6f}, "
          f"val mse {result.val_mse:.6f}, saved to {args.out}")
    return 0


def cmd_generate(args) -> int:
    denoiser_r, denoiser_u = _load_models(args)
    blocking = load_blocking(args.blocking)
    config_doc = _load_config_file(args.config)
    request = GenerationRequest(
        blocking=blocking,
        strategy=parse_strategy(args.strategy),
        seed=args.seed,
        refinement=_refinement_from_doc(config_doc),
    )
    motion, trace = execute_request(request, denoiser_r, denoiser_u)
    save_motion(motion, args.out)
    if args.trace:
        Path(args.trace).write_text(dumps_canonical(trace_to_doc(trace)))
    print(f"wrote motion to {args.out}" + (f" and trace to {args.trace}" if args.trace else ""))
    return 0


def cmd_bench(args) -> int:
    denoiser_r, denoiser_u = _load_models(args)
    clips = _load_dataset_dir(args.data)
    strategies = [parse_strategy(s) for s in args.strategies.split(";")]
    spec = BenchmarkSpec(clip_length=clips[0].num_frames, count=len(clips))
    report = run_benchmark(strategies, clips, spec, denoiser_r, denoiser_u, seeds=args.seed)
    Path(args.out).write_text(dumps_canonical(report.to_doc()))
    text = report.to_text()
    Path(args.out).with_suffix(".txt").write_text(text + "\n")
    print(text)
    return 0


def cmd_ablate_n(args) -> int:
    denoiser_r, denoiser_u = _load_models(args)
    clips = _load_dataset_dir(args.data)
    spec = BenchmarkSpec(clip_length=clips[0].num_frames, count=len(clips))
    n_values = [int(v) for v in args.n_values.split(",")]
    c_values = [float(v) for v in args.c_values.split(",")]
    curves = ablate_n(clips, spec, denoiser_r, denoiser_u, n_values=n_values,
                      c_values=c_values, seeds=args.seed, out_dir=args.out)
    for c, curve in curves.items():
        print(f"c={c:g}: " + ", ".join(f"N={n} FID={v:.4f}" for n, v in curve))
    return 0


def cmd_metrics(args) -> int:
    motion = load_motion(args.motion)
    doc = {
        "footskate": footskate(motion, DEFAULT_SKELETON),
        "jitter": jitter(motion),
    }
    if args.blocking:
        doc["keyframe_error"] = keyframe_error(load_blocking(args.blocking), motion)
    if args.reference:
        doc["fid_vs_reference"] = fid([motion], _load_dataset_dir(args.reference))
    print(dumps_canonical(doc))
    return 0


def cmd_make_blocking(args) -> int:
    gt = load_motion(args.motion)
    spec = BenchmarkSpec(clip_length=gt.num_frames, max_keys=args.max_keys,
                         time_jitter=args.time_jitter)
    blocking = make_blocking(gt, spec, args.seed)
    save_blocking(blocking, args.out)
    print(f"wrote blocking set with {blocking.num_keys} keys to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    denoiser_r, denoiser_u = _load_models(args)
    manager = JobManager(denoiser_r, denoiser_u, data_dir=args.data_dir,
                         workers=args.workers,
                         model_ids={"r": Path(args.model_r).name,
                                    "u": Path(args.model_u).name})
    app = create_app(manager)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockdetail",
        description="Motion detailing from blocking poses: train, generate, benchmark.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", help="emit a procedural motion dataset")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--kinds", default=None, help="comma list from walk,kick,jump,idle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("train", help="train the U or R denoiser")
    p.add_argument("--mode", choices=["U", "R"], required=True)
    p.add_argument("--data", required=True, help="dataset directory from synth-data")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--hidden", type=int, default=256)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--diffusion-steps", type=int, default=1000)
    p.add_argument("--config", default=None, help="versioned JSON config file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="blocking file -> motion file (+ trace)")
    p.add_argument("--blocking", required=True)
    p.add_argument("--model-r", required=True)
    p.add_argument("--model-u", required=True)
    p.add_argument("--strategy", default="detailing", help="name or name:k=v,k=v")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="run the strategy benchmark -> report")
    p.add_argument("--data", required=True)
    p.add_argument("--model-r", required=True)
    p.add_argument("--model-u", required=True)
    p.add_argument("--strategies", default="detailing:c=0.85;hard-impute",
                   help="semicolon-separated strategy descriptors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report JSON path (.txt written alongside)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate-n", help="refinement-cadence sweep -> (N, FID) curves")
    p.add_argument("--data", required=True)
    p.add_argument("--model-r", required=True)
    p.add_argument("--model-u", required=True)
    p.add_argument("--n-values", default="1,10,50,100,250,500")
    p.add_argument("--c-values", default="0.85,0.5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory for curve files")
    p.set_defaults(func=cmd_ablate_n)

    p = sub.add_parser("metrics", help="compute metrics for a motion file")
    p.add_argument("--motion", required=True)
    p.add_argument("--blocking", default=None, help="adds keyframe error")
    p.add_argument("--reference", default=None, help="dataset dir, adds FID")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("make-blocking", help="simulate a blocking set from a motion")
    p.add_argument("--motion", required=True)
    p.add_argument("--max-keys", type=int, default=10)
    p.add_argument("--time-jitter", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_blocking)

    p = sub.add_parser("serve", help="start the HTTP job service")
    p.add_argument("--model-r", required=True)
    p.add_argument("--model-u", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--data-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""``duallstm synth|train|predict|eval`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, checkpoint
from .checkpoint import CheckpointError
from .dataset import (DataError, SynthConfig, file_digest, format_trajectory_rows,
                      parse_trajectory_file, slice_windows, split_train_val, synth_generate)
from .geometry import ACCEL_SCALE, DT, HORIZON, SPEED_SCALE, WINDOW, LaneGeometry
from .intention import init_intention_model
from .lstm import ContractError, GradientExplosionError
from .trajectory import format_prediction, init_trajectory_model, predict_batch
from .training import (HyperConfig, evaluate_lead_times, evaluate_rmse, train_intention,
                       train_trajectory)

log = logging.getLogger("duallstm")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _geom(path) -> LaneGeometry:
    if path is None:
        return LaneGeometry()
    try:
        return LaneGeometry.from_file(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad geometry file {path}: {exc}") from exc


def _require(path, what):
    if path is None or not Path(path).is_file():
        raise UsageError(f"{what} not found: {path}")
    return Path(path)


def write_manifest(path, command: str, seed, inputs: dict, outputs: list, t0: float, extra=None):
    lines = [f"command={command}", f"tool_version={__version__}", f"seed={seed}"]
    for key, p in inputs.items():
        if p is not None:
            lines.append(f"input_{key}={p}")
            lines.append(f"input_{key}_sha256={file_digest(p)}")
    for p in outputs:
        lines.append(f"output={p}")
    for k, v in (extra or {}).items():
        lines.append(f"{k}={v}")
    lines.append(f"wall_time_s={time.perf_counter() - t0:.3f}")
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_synth(args) -> int:
    t0 = time.perf_counter()
    cfg_path = _require(args.config, "synth config")
    try:
        cfg = SynthConfig.from_file(cfg_path)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    geom = _geom(args.geom)
    tracks = synth_generate(cfg, args.seed, geom)
    out = Path(args.out)
    out.write_text(format_trajectory_rows(tracks))
    write_manifest(f"{out}.manifest", "synth", args.seed, {"config": cfg_path, "geom": args.geom},
                   [out], t0, {"tracks": len(tracks)})
    return EXIT_OK


def bundle_hyper(hyper: HyperConfig, intent, traj) -> dict:
    return {
        "input_dim": intent.lstm.input_dim,
        "intent_hidden": intent.lstm.hidden_dim,
        "traj_hidden": traj.lstm.hidden_dim,
        "window": WINDOW,
        "horizon": HORIZON,
        "dt": DT,
        "speed_scale": SPEED_SCALE,
        "accel_scale": ACCEL_SCALE,
        "clip_norm": hyper.clip_norm,
        "forget_bias": hyper.forget_bias,
        "init_seed": hyper.seed,
        "lr_init": hyper.lr_init,
        "lr_decay_factor": hyper.lr_decay_factor,
        "patience": hyper.patience,
        "batch_size": hyper.batch_size,
        "epochs": hyper.epochs,
        "class_reweight_cap": hyper.class_reweight_cap,
    }


def cmd_train(args) -> int:
    t0 = time.perf_counter()
    data = _require(args.data, "data file")
    geom = _geom(args.geom)
    if args.hyper is not None:
        try:
            hyper = HyperConfig.from_file(_require(args.hyper, "hyper config"))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        hyper = HyperConfig()
    if args.seed is not None:
        hyper.seed = args.seed
    tracks = parse_trajectory_file(data, args.units)
    samples = slice_windows(tracks, geom)
    if len(samples) == 0:
        raise DataError(f"{data}: no samples (no track has 100 contiguous frames)")
    train, val = split_train_val(samples, 0.7, hyper.seed)
    intent = init_intention_model(np.random.default_rng([hyper.seed, 10]), forget_bias=hyper.forget_bias)
    traj = init_trajectory_model(np.random.default_rng([hyper.seed, 20]), forget_bias=hyper.forget_bias)
    intent, h_int = train_intention(train, val, hyper, intent)
    traj, h_traj = train_trajectory(train, val, hyper, traj)
    out = Path(args.out)
    checkpoint.save(out, {"intent": intent, "traj": traj}, bundle_hyper(hyper, intent, traj))
    Path(f"{out}.intent_history.csv").write_text(h_int.to_table())
    Path(f"{out}.traj_history.csv").write_text(h_traj.to_table())
    counts = samples.class_counts()
    write_manifest(f"{out}.manifest", "train", hyper.seed,
                   {"data": data, "geom": args.geom, "hyper": args.hyper},
                   [out, f"{out}.intent_history.csv", f"{out}.traj_history.csv"], t0,
                   {"windows_train": len(train), "windows_val": len(val),
                    "count_LK": counts[0], "count_LLC": counts[1], "count_RLC": counts[2],
                    "skipped_anchors": samples.skipped})
    if h_int.diverged or h_traj.diverged:
        log.error("training diverged; wrote last good checkpoint")
        return EXIT_NUMERIC
    return EXIT_OK


def _load_models(path):
    models, hyper = checkpoint.load(_require(path, "checkpoint"))
    return models["intent"], models["traj"], hyper


def cmd_predict(args) -> int:
    t0 = time.perf_counter()
    intent, traj, _ = _load_models(args.checkpoint)
    data = _require(args.data, "data file")
    geom = _geom(args.geom)
    tracks = parse_trajectory_file(data, args.units)
    samples = slice_windows(tracks, geom, require_future=False)
    out = Path(args.out)
    chunks = []
    if len(samples):
        pred = predict_batch(intent, traj, samples)
        for i in range(len(samples)):
            chunks.append(format_prediction(int(samples.vehicle_id[i]), int(samples.frame[i]), pred, i))
    out.write_text("".join(chunks))
    write_manifest(f"{out}.manifest", "predict", None,
                   {"checkpoint": args.checkpoint, "data": data, "geom": args.geom}, [out], t0,
                   {"records": len(samples), "skipped_anchors": samples.skipped})
    return EXIT_OK


def cmd_eval(args) -> int:
    t0 = time.perf_counter()
    intent, traj, _ = _load_models(args.checkpoint)
    data = _require(args.data, "data file")
    geom = _geom(args.geom)
    tracks = parse_trajectory_file(data, args.units)
    samples = slice_windows(tracks, geom)
    if len(samples) == 0:
        raise DataError(f"{data}: no samples to evaluate")
    table = evaluate_rmse(intent, traj, samples)
    leads = evaluate_lead_times(intent, tracks, geom)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {"rmse.csv": table.to_table(), "lead_times.csv": leads.to_table(),
             "lead_time_hist.csv": leads.histogram_table()}
    for name, text in files.items():
        (out / name).write_text(text)
    write_manifest(out / "manifest.txt", "eval", None,
                   {"checkpoint": args.checkpoint, "data": data, "geom": args.geom},
                   [out / n for n in files], t0,
                   {"windows": len(samples), "events": len(leads.events),
                    "missed": leads.missed(), "skipped_anchors": samples.skipped})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="duallstm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, checkpoint_arg=False):
        p.add_argument("--data", required=True)
        p.add_argument("--geom")
        p.add_argument("--out", required=True)
        p.add_argument("--units", choices=("feet", "meters"), default="meters")
        if checkpoint_arg:
            p.add_argument("--checkpoint", required=True)

    p = sub.add_parser("synth", help="write synthetic NGSIM-format tracks")
    p.add_argument("--config", required=True)
    p.add_argument("--geom")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train both networks")
    common(p)
    p.add_argument("--hyper")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write one prediction record per anchor")
    common(p, checkpoint_arg=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="RMSE table and lane-change lead times")
    common(p, checkpoint_arg=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"duallstm: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CheckpointError, ContractError, UnicodeDecodeError) as exc:
        print(f"duallstm: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (GradientExplosionError, FloatingPointError) as exc:
        print(f"duallstm: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

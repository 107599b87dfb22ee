"""Batch command-line surface for the recognition pipeline.

Subcommands: configure, label, smooth, segment, evaluate, gen-corpus.
Exit codes: 0 success, 1 usage error, 2 data error.  Log verbosity comes from
the COSFIRE_SCENE_LOG environment variable (error, warn, info, debug).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent import futures
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bankio import load_bank, save_bank
from .corpus import CorpusSpec, generate_corpus
from .cosfire import ChannelCache, ConfigSpec, configure_filter
from .csvio import (
    read_labels,
    read_manifest,
    read_truth,
    write_events,
    write_labels,
    write_report_json,
)
from .errors import SceneFireError
from .gabor import GaborBank, bank_responses
from .imaging import load_image
from .inhibition import InhibitionParams
from .metrics import evaluate_scene, format_report, summary_report
from .scene import UNKNOWN, FrameLabel, SceneBank, SceneDef, label_frame
from .timeline import SmoothingParams, fill_holes, segment_events

log = logging.getLogger("scenefire")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; we reserve 2 for data errors."""

    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}: {exc}") from exc


def _keypoint(text: str) -> tuple[float, float]:
    parts = _floats(text)
    if len(parts) != 2:
        raise UsageError(f"expected a keypoint as x,y - got {text!r}")
    return parts[0], parts[1]


def _weight_sigma(text: str):
    if text == "uniform":
        return "uniform"
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f'--weight-sigma must be "uniform" or a number, got {text!r}') from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scenefire",
                     description="Familiar-scene recognition for egocentric photo streams")
    parser.add_argument("--version", action="version", version=f"scenefire {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("configure", parents=[], help="build filters from prototype keypoints")
    p.add_argument("--image", action="append", default=[], help="prototype image (repeatable)")
    p.add_argument("--keypoint", action="append", default=[], metavar="X,Y",
                   help="keypoint for the matching --image entry")
    p.add_argument("--scene", action="append", default=[], help="scene label for the entry")
    p.add_argument("--name", action="append", default=[], help="filter name for the entry")
    p.add_argument("--out", required=True, help="output filter-bank JSON path")
    p.add_argument("--lambdas", default="4,5.656854249492381,8,11.313708498984761,16",
                   help="comma-separated Gabor wavelengths in pixels")
    p.add_argument("--orientations", type=int, default=8,
                   help="number of Gabor orientations (k*pi/N grid)")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--sigma-ratio", type=float, default=0.56,
                   help="Gabor envelope sigma as a fraction of wavelength")
    p.add_argument("--t1", type=float, default=0.1, help="bank noise floor fraction")
    p.add_argument("--inhibition-alpha", type=float, default=1.0,
                   help="surround suppression strength (0 disables)")
    p.add_argument("--inhibition-ratio", type=float, default=4.0,
                   help="outer/inner sigma ratio of the suppression surround")
    p.add_argument("--radii", default="0,5,10,20", help="circle radii scanned at configuration")
    p.add_argument("--angular-step", type=float, default=math.pi / 60)
    p.add_argument("--t2", type=float, default=0.75, help="subunit selection fraction")
    p.add_argument("--t3", type=float, default=0.25, help="output threshold fraction")
    p.add_argument("--sigma0", type=float, default=0.67, help="base blur in pixels")
    p.add_argument("--alpha-blur", type=float, default=0.1, help="blur growth per pixel of rho")
    p.add_argument("--weight-sigma", default="uniform")
    p.add_argument("--detection-threshold", type=float, default=0.25,
                   help="fraction of prototype response that counts as a vote")
    p.add_argument("--resize-max", type=int, default=None,
                   help="downscale images so the longer side fits this many pixels")

    p = sub.add_parser("label", help="label every frame of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--bank", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--psis", default="0",
                   help="comma-separated rotation offsets in radians; must include 0")
    p.add_argument("--detection-threshold", type=float, default=None,
                   help="override every scene's stored threshold")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: machine parallelism)")
    p.add_argument("--resize-max", type=int, default=None)
    p.add_argument("--deterministic", action="store_true",
                   help="omit the generated_at comment for bit-identical reruns")

    p = sub.add_parser("smooth", help="fill unknown holes with the sliding decision window")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=2, help="window half-size in frames")
    p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("segment", help="aggregate labels into timed events")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("evaluate", help="precision/recall/F-measure against ground truth")
    p.add_argument("--labels", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--json-out", default=None, help="also write the full-precision report here")
    p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("gen-corpus", help="generate the synthetic test corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--distractor-fraction", type=float, default=0.4)
    p.add_argument("--max-rotation", type=float, default=math.pi / 8)
    p.add_argument("--frame-size", type=int, default=128)
    p.add_argument("--spacing", type=float, default=30.0, help="seconds between frames")
    p.add_argument("--deterministic", action="store_true")

    return parser


def _bank_from_args(args) -> tuple[GaborBank, InhibitionParams | None]:
    if args.orientations < 1:
        raise UsageError("--orientations must be >= 1")
    bank = GaborBank(
        wavelengths=tuple(_floats(args.lambdas)),
        thetas=tuple(k * math.pi / args.orientations for k in range(args.orientations)),
        gamma=args.gamma,
        sigma_over_lambda=args.sigma_ratio,
        t1=args.t1,
    )
    inhibition = None
    if args.inhibition_alpha > 0:
        inhibition = InhibitionParams(alpha=args.inhibition_alpha,
                                      surround_ratio=args.inhibition_ratio)
    return bank, inhibition


def cmd_configure(args) -> int:
    entries = list(zip(args.image, args.keypoint, args.scene, args.name, strict=False))
    lengths = {len(args.image), len(args.keypoint), len(args.scene), len(args.name)}
    if len(lengths) != 1:
        raise UsageError("--image, --keypoint, --scene and --name must repeat in lockstep")
    if not entries:
        raise UsageError("no prototype entries given; the bank would be empty")
    names = [name for _, _, _, name in entries]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise UsageError(f"duplicate filter names: {', '.join(dupes)}")
    if not (0 < args.detection_threshold <= 1):
        raise UsageError("--detection-threshold must be in (0, 1]")

    bank, inhibition = _bank_from_args(args)
    spec = ConfigSpec(
        bank=bank,
        inhibition=inhibition,
        radii=tuple(_floats(args.radii)),
        angular_step=args.angular_step,
        t2=args.t2,
        t3=args.t3,
        sigma0=args.sigma0,
        alpha_blur=args.alpha_blur,
        weight_sigma=_weight_sigma(args.weight_sigma),
    )

    scene_filters: dict[str, list] = {}
    scene_order: list[str] = []
    by_image: dict[str, list] = {}
    for image_path, keypoint, scene, name in entries:
        by_image.setdefault(image_path, []).append((keypoint, scene, name))
        if scene not in scene_order:
            scene_order.append(scene)

    for image_path, image_entries in by_image.items():
        try:
            img = load_image(image_path, max_dim=args.resize_max)
            stack = bank_responses(img, bank, inhibition)
            cache = ChannelCache(img, bank, inhibition)
            for keypoint, scene, name in image_entries:
                filt = configure_filter(img, _keypoint(keypoint), spec, name, scene,
                                        stack=stack, cache=cache)
                scene_filters.setdefault(scene, []).append(filt)
                print(f"configured {name} (scene {scene}): {len(filt.tuples)} tuples, "
                      f"prototype response {filt.prototype_response:.6g}")
        except SceneFireError as exc:
            raise SceneFireError(f"prototype {image_path}: {exc}") from exc

    scene_bank = SceneBank(
        scenes=tuple(
            SceneDef(name=s, filters=tuple(scene_filters[s]),
                     detection_threshold=args.detection_threshold)
            for s in scene_order
        ),
        bank=bank,
        inhibition=inhibition,
    )
    save_bank(scene_bank, args.out)
    total = sum(len(f) for f in scene_filters.values())
    print(f"wrote {args.out}: {total} filters across {len(scene_order)} scenes")
    return EXIT_OK


_WORKER: dict = {}


def _init_worker(scene_bank: SceneBank, psis: list[float], resize_max: int | None) -> None:
    _WORKER[""] = (scene_bank, psis, resize_max)


def _label_task(task):
    """One frame end to end; returns (index, FrameLabel, error message or None)."""
    index, frame_id, path, ts = task
    scene_bank, psis, resize_max = _WORKER[""]
    names = scene_bank.scene_names()
    try:
        img = load_image(path, max_dim=resize_max)
        return index, label_frame(img, scene_bank, psis, frame_id=frame_id, timestamp=ts), None
    except (SceneFireError, OSError) as exc:
        fallback = FrameLabel(
            frame_id=frame_id,
            timestamp=ts,
            label=UNKNOWN,
            responses={n: 0 for n in names},
            max_response={n: 0.0 for n in names},
        )
        return index, fallback, f"{path}: {exc}"


def cmd_label(args) -> int:
    psis = _floats(args.psis)
    if not psis or 0 not in psis:
        raise UsageError("--psis must be non-empty and include 0")
    scene_bank = load_bank(args.bank)
    if args.detection_threshold is not None:
        if not (0 < args.detection_threshold <= 1):
            raise UsageError("--detection-threshold must be in (0, 1]")
        scene_bank = replace(
            scene_bank,
            scenes=tuple(replace(s, detection_threshold=args.detection_threshold)
                         for s in scene_bank.scenes),
        )
    entries = read_manifest(args.manifest)
    tasks = [(i, fid, str(path), ts) for i, (fid, path, ts) in enumerate(entries)]
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")

    results: list = [None] * len(tasks)
    warnings = 0
    done = 0

    def record(index, fl, error):
        nonlocal warnings, done
        results[index] = fl
        done += 1
        if error is not None:
            warnings += 1
            log.warning("frame %s unreadable, labelled %s: %s", fl.frame_id, UNKNOWN, error)
        if done % 10 == 0 or done == len(tasks):
            log.info("labelled %d/%d frames", done, len(tasks))

    if jobs == 1 or len(tasks) <= 1:
        _init_worker(scene_bank, psis, args.resize_max)
        for task in tasks:
            record(*_label_task(task))
    else:
        with futures.ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker,
            initargs=(scene_bank, psis, args.resize_max),
        ) as pool:
            for index, fl, error in pool.map(_label_task, tasks, chunksize=1):
                record(index, fl, error)

    write_labels(args.out, results, scene_bank.scene_names(),
                 deterministic=args.deterministic)
    log.info("wrote %s (%d frames, %d warnings)", args.out, len(results), warnings)
    return EXIT_OK


def cmd_smooth(args) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    labels, scene_names = read_labels(args.labels)
    filled = fill_holes(labels, SmoothingParams(k=args.k))
    write_labels(args.out, filled, scene_names, deterministic=args.deterministic)
    changed = sum(1 for a, b in zip(labels, filled) if a.label != b.label)
    print(f"filled {changed} holes across {len(labels)} frames -> {args.out}")
    return EXIT_OK


def cmd_segment(args) -> int:
    labels, _ = read_labels(args.labels)
    events = segment_events(labels)
    write_events(args.out, events, deterministic=args.deterministic)
    print(f"wrote {len(events)} events -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    labels, _ = read_labels(args.labels)
    truth = read_truth(args.truth)
    scene_names = sorted(
        {label for _, label in truth if label != UNKNOWN}
        | {fl.label for fl in labels if fl.label != UNKNOWN}
    )
    if not scene_names:
        raise SceneFireError("no scene labels in either predictions or truth")
    scores = [evaluate_scene(labels, truth, scene) for scene in scene_names]
    report = summary_report(scores)
    print(format_report(report))
    if args.json_out:
        write_report_json(args.json_out, report, deterministic=args.deterministic)
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    spec = CorpusSpec(
        n_frames=args.frames,
        seed=args.seed,
        distractor_fraction=args.distractor_fraction,
        max_rotation=args.max_rotation,
        frame_size=args.frame_size,
        spacing_seconds=args.spacing,
    )
    summary = generate_corpus(args.out, spec, deterministic=args.deterministic)
    kinds = ", ".join(f"{k}={v}" for k, v in sorted(summary["by_kind"].items()))
    print(f"wrote {summary['frames']} frames to {args.out} ({kinds})")
    print(f"scenes: {', '.join(summary['scenes'])}; see manifest.csv, truth.csv, prototypes.csv")
    return EXIT_OK


_COMMANDS = {
    "configure": cmd_configure,
    "label": cmd_label,
    "smooth": cmd_smooth,
    "segment": cmd_segment,
    "evaluate": cmd_evaluate,
    "gen-corpus": cmd_gen_corpus,
}


def _setup_logging() -> None:
    level_name = os.environ.get("COSFIRE_SCENE_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        stream=sys.stderr,
        level=levels.get(level_name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SceneFireError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

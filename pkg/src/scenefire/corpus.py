"""Synthetic test corpus: planted scene patterns, distractor textures, and the
manifest/truth files the CLI pipeline consumes.

Two scene patterns ship with the generator: a four-arm cross ("CoffeeCorner"
stand-in) and a three-arm fork ("Working" stand-in).  Their arm geometries
share no rotation within the tolerance range, so one scene's filters stay
silent on the other's frames.  Distractor frames are blank or textured;
texture is dense on purpose, which is exactly what surround inhibition is
there to reject.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
from PIL import Image

from .csvio import format_timestamp, write_truth
from .errors import InvalidParameterError
from .imaging import GrayImage
from .scene import UNKNOWN

SCENE_CROSS = "CoffeeCorner"
SCENE_FORK = "Working"

CROSS_ARM_ANGLES = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)
# Fork arms sit on the pi/8 orientation grid of the default bank, so every arm
# has an exactly matching Gabor channel and configuration picks it up cleanly.
FORK_ARM_ANGLES = (0.5 * math.pi, 1.25 * math.pi, 1.75 * math.pi)

DEFAULT_START = datetime(2016, 5, 1, 9, 0, 0, tzinfo=timezone.utc)


def blank_frame(size: int, value: float = 0.0) -> GrayImage:
    return np.full((size, size), value, dtype=np.float64)


def draw_segment(
    img: GrayImage,
    p0: tuple[float, float],
    p1: tuple[float, float],
    thickness: float = 3.0,
    value: float = 1.0,
) -> None:
    """Render a bar between two (x, y) points with a 1 px linear edge falloff."""
    h, w = img.shape
    yy, xx = np.mgrid[:h, :w].astype(np.float64)
    vx, vy = p1[0] - p0[0], p1[1] - p0[1]
    seg_len2 = vx * vx + vy * vy
    if seg_len2 == 0:
        dist = np.hypot(xx - p0[0], yy - p0[1])
    else:
        t = np.clip(((xx - p0[0]) * vx + (yy - p0[1]) * vy) / seg_len2, 0.0, 1.0)
        dist = np.hypot(xx - (p0[0] + t * vx), yy - (p0[1] + t * vy))
    bar = np.clip(thickness / 2.0 + 0.5 - dist, 0.0, 1.0) * value
    np.maximum(img, bar, out=img)


def _arm_pattern(
    img: GrayImage,
    center: tuple[float, float],
    arm_angles: tuple[float, ...],
    rotation: float = 0.0,
    arm_length: float = 26.0,
    thickness: float = 3.0,
    value: float = 1.0,
) -> None:
    cx, cy = center
    for angle in arm_angles:
        a = angle + rotation
        draw_segment(
            img,
            (cx, cy),
            (cx + arm_length * math.cos(a), cy + arm_length * math.sin(a)),
            thickness=thickness,
            value=value,
        )


def cross_pattern(img, center, rotation=0.0, arm_length=26.0, thickness=3.0, value=1.0):
    """Four radial arms at right angles; the CoffeeCorner stand-in."""
    _arm_pattern(img, center, CROSS_ARM_ANGLES, rotation, arm_length, thickness, value)


def fork_pattern(img, center, rotation=0.0, arm_length=26.0, thickness=3.0, value=1.0):
    """Three radial arms (down, up-left, up-right); the Working stand-in."""
    _arm_pattern(img, center, FORK_ARM_ANGLES, rotation, arm_length, thickness, value)


PATTERNS = {SCENE_CROSS: cross_pattern, SCENE_FORK: fork_pattern}


def checkerboard(img: GrayImage, tile: int, value: float = 1.0) -> None:
    h, w = img.shape
    yy, xx = np.mgrid[:h, :w]
    img[((xx // tile) + (yy // tile)) % 2 == 0] = value


def grating(img: GrayImage, wavelength: float, angle: float, contrast: float = 1.0) -> None:
    h, w = img.shape
    yy, xx = np.mgrid[:h, :w].astype(np.float64)
    phase = 2 * math.pi * (xx * math.cos(angle) + yy * math.sin(angle)) / wavelength
    img += contrast * 0.5 * (1 + np.cos(phase))
    np.clip(img, 0.0, 1.0, out=img)


def noise_blobs(img: GrayImage, rng: np.random.Generator, scale: int = 4,
                contrast: float = 0.8) -> None:
    h, w = img.shape
    coarse = rng.random(((h + scale - 1) // scale, (w + scale - 1) // scale))
    fine = np.kron(coarse, np.ones((scale, scale)))[:h, :w]
    img += contrast * (fine > 0.6) * fine
    np.clip(img, 0.0, 1.0, out=img)


def texture_contour_image(size: int = 128) -> tuple[GrayImage, np.ndarray, np.ndarray]:
    """One image holding a dense grating patch and an isolated contour.

    Returns (image, texture_mask, contour_mask): interior masks of the two
    regions, for measuring how much suppression each one receives.
    """
    img = blank_frame(size)
    y0, y1 = size // 6, size - size // 6
    # dense vertical grating on the left
    gx0, gx1 = size // 8, size // 2 - size // 8
    yy, xx = np.mgrid[:size, :size].astype(np.float64)
    stripes = 0.5 * (1 + np.cos(2 * math.pi * xx / 8.0))
    patch = (xx >= gx0) & (xx < gx1) & (yy >= y0) & (yy < y1)
    img[patch] = stripes[patch]
    # isolated vertical bar on the right
    bar_x = 3 * size // 4
    draw_segment(img, (bar_x, y0), (bar_x, y1), thickness=3.0, value=1.0)

    margin = 8
    texture_mask = (xx >= gx0 + margin) & (xx < gx1 - margin) & \
                   (yy >= y0 + margin) & (yy < y1 - margin)
    contour_mask = (np.abs(xx - bar_x) <= 2) & (yy >= y0 + margin) & (yy < y1 - margin)
    return img, texture_mask, contour_mask


@dataclass(frozen=True)
class CorpusSpec:
    """Shape of the generated corpus; defaults match the acceptance workload."""

    n_frames: int = 60
    seed: int = 1234
    distractor_fraction: float = 0.4
    max_rotation: float = math.pi / 8
    frame_size: int = 128
    spacing_seconds: float = 30.0
    scene_block: int = 6
    distractor_block: int = 4
    max_holes: int = 4
    start: datetime = DEFAULT_START

    def __post_init__(self):
        if self.n_frames < 1:
            raise InvalidParameterError(f"n_frames must be >= 1, got {self.n_frames}")
        if not (0 <= self.distractor_fraction < 1):
            raise InvalidParameterError(
                f"distractor_fraction must be in [0, 1), got {self.distractor_fraction}"
            )
        if self.frame_size < 96:
            raise InvalidParameterError(
                f"frame_size must be >= 96 to fit the patterns, got {self.frame_size}"
            )


@dataclass(frozen=True)
class FramePlan:
    frame_id: str
    kind: str  # "scene" | "hole" | "blank" | "texture"
    scene: str | None
    truth: str
    timestamp: datetime


def _split(total: int, parts: int) -> list[int]:
    return [total // parts + (1 if i < total % parts else 0) for i in range(parts)]


def plan_corpus(spec: CorpusSpec) -> list[FramePlan]:
    """Alternate scene and distractor blocks so no distractor frame sits between
    same-scene neighbors (hole filling must never invent a distractor label);
    in-block hole frames carry the scene in truth and rely on smoothing."""
    n_distract = round(spec.n_frames * spec.distractor_fraction)
    n_scene = spec.n_frames - n_distract
    n_blocks = max(1, round(n_scene / spec.scene_block))
    scene_sizes = _split(n_scene, n_blocks)
    distract_sizes = _split(n_distract, n_blocks)

    plans: list[FramePlan] = []
    scenes = (SCENE_CROSS, SCENE_FORK)
    holes_left = spec.max_holes
    texture_kinds = ["texture", "blank"]
    t_index = 0

    def stamp() -> datetime:
        return spec.start + timedelta(seconds=spec.spacing_seconds * len(plans))

    for b in range(n_blocks):
        scene = scenes[b % 2]
        size = scene_sizes[b]
        hole_at = size // 2 if (holes_left > 0 and size >= 5) else -1
        if hole_at >= 0:
            holes_left -= 1
        for j in range(size):
            kind = "hole" if j == hole_at else "scene"
            plans.append(FramePlan(
                frame_id=f"frame_{len(plans):04d}",
                kind=kind,
                scene=scene,
                truth=scene,
                timestamp=stamp(),
            ))
        for _ in range(distract_sizes[b]):
            kind = texture_kinds[t_index % 2]
            t_index += 1
            plans.append(FramePlan(
                frame_id=f"frame_{len(plans):04d}",
                kind=kind,
                scene=None,
                truth=UNKNOWN,
                timestamp=stamp(),
            ))
    return plans


def render_frame(plan: FramePlan, spec: CorpusSpec, rng: np.random.Generator) -> GrayImage:
    img = blank_frame(spec.frame_size)
    if plan.kind == "scene":
        margin = 44
        cx = rng.uniform(margin, spec.frame_size - margin)
        cy = rng.uniform(margin, spec.frame_size - margin)
        rotation = rng.uniform(-spec.max_rotation, spec.max_rotation)
        value = rng.uniform(0.85, 1.0)
        PATTERNS[plan.scene](img, (cx, cy), rotation=rotation, value=value)
    elif plan.kind == "texture":
        style = rng.integers(0, 3)
        if style == 0:
            checkerboard(img, tile=int(rng.integers(4, 8)), value=float(rng.uniform(0.7, 1.0)))
        elif style == 1:
            grating(img, wavelength=float(rng.uniform(6, 14)),
                    angle=float(rng.uniform(0, math.pi)))
        else:
            noise_blobs(img, rng)
    # "hole" and "blank" frames stay empty
    return img


def save_png(img: GrayImage, path: str | Path) -> None:
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(Path(path), format="PNG")


def prototype_image(scene: str, size: int = 160) -> tuple[GrayImage, tuple[int, int]]:
    """Canonical unrotated pattern centered on a blank canvas; returns image
    and keypoint."""
    img = blank_frame(size)
    center = (size // 2, size // 2)
    PATTERNS[scene](img, center)
    return img, center


def generate_corpus(out_dir: str | Path, spec: CorpusSpec = CorpusSpec(),
                    deterministic: bool = False) -> dict:
    """Write frames/, prototypes/, manifest.csv, truth.csv, prototypes.csv.

    Returns a summary dict with per-kind frame counts.
    """
    out = Path(out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    (out / "prototypes").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    plans = plan_corpus(spec)

    manifest_rows = []
    truth_rows = []
    counts: dict[str, int] = {}
    for plan in plans:
        img = render_frame(plan, spec, rng)
        rel = f"frames/{plan.frame_id}.png"
        save_png(img, out / rel)
        manifest_rows.append((plan.frame_id, rel, format_timestamp(plan.timestamp)))
        truth_rows.append((plan.frame_id, plan.truth))
        counts[plan.kind] = counts.get(plan.kind, 0) + 1

    with (out / "manifest.csv").open("w", newline="", encoding="utf-8") as fh:
        if not deterministic:
            fh.write(f"# generated_at {format_timestamp(datetime.now(timezone.utc))}\n")
        fh.write("frame_id,path,timestamp\n")
        for row in manifest_rows:
            fh.write(",".join(row) + "\n")
    write_truth(out / "truth.csv", truth_rows, deterministic=deterministic)

    proto_rows = []
    for scene in (SCENE_CROSS, SCENE_FORK):
        img, (kx, ky) = prototype_image(scene)
        rel = f"prototypes/{scene}.png"
        save_png(img, out / rel)
        proto_rows.append((f"{scene}-proto", scene, rel, str(kx), str(ky)))
    with (out / "prototypes.csv").open("w", newline="", encoding="utf-8") as fh:
        fh.write("name,scene,path,keypoint_x,keypoint_y\n")
        for row in proto_rows:
            fh.write(",".join(row) + "\n")

    return {
        "frames": len(plans),
        "by_kind": counts,
        "scenes": [SCENE_CROSS, SCENE_FORK],
    }


@dataclass(frozen=True)
class PrototypeEntry:
    name: str
    scene: str
    image: GrayImage
    keypoint: tuple[int, int]
    source: str  # shared per-image key so callers can reuse per-image stacks


def suite_prototypes() -> list[PrototypeEntry]:
    """Prototype set mirroring a two-scene bank with 8 + 3 filters.

    Eight cross filters come from five images (2+2+2+1+1 keypoints, arm
    lengths varied) and three fork filters from two images (2+1).
    """
    entries: list[PrototypeEntry] = []

    def add_image(source: str, scene: str, specs: list[tuple[int, int, float]], width: int):
        img = np.zeros((160, width), dtype=np.float64)
        for kx, ky, arm in specs:
            PATTERNS[scene](img, (kx, ky), arm_length=arm)
        for kx, ky, _ in specs:
            entries.append(PrototypeEntry(
                name=f"{scene}-{len([e for e in entries if e.scene == scene]) + 1:02d}",
                scene=scene,
                image=img,
                keypoint=(kx, ky),
                source=source,
            ))

    arms = [22.0, 24.0, 26.0, 28.0]
    add_image("cc-1", SCENE_CROSS, [(84, 80, arms[0]), (216, 80, arms[1])], 300)
    add_image("cc-2", SCENE_CROSS, [(84, 80, arms[2]), (216, 80, arms[3])], 300)
    add_image("cc-3", SCENE_CROSS, [(84, 80, arms[1]), (216, 80, arms[2])], 300)
    add_image("cc-4", SCENE_CROSS, [(80, 80, arms[0])], 160)
    add_image("cc-5", SCENE_CROSS, [(80, 80, arms[3])], 160)
    add_image("wk-1", SCENE_FORK, [(84, 80, arms[0]), (216, 80, arms[2])], 300)
    add_image("wk-2", SCENE_FORK, [(80, 80, arms[1])], 160)
    return entries


def write_prototype_suite(out_dir: str | Path) -> list[tuple[str, str, str, int, int]]:
    """Save the 8+3 suite as PNGs; returns (name, scene, path, kx, ky) rows."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    saved: dict[str, str] = {}
    for entry in suite_prototypes():
        if entry.source not in saved:
            rel = f"{entry.source}.png"
            save_png(entry.image, out / rel)
            saved[entry.source] = rel
        rows.append((entry.name, entry.scene, str(out / saved[entry.source]),
                     entry.keypoint[0], entry.keypoint[1]))
    return rows

"""Deterministic synthetic chest-phantom generator.

Stands in for real radiographs and clinician traces: renders a smooth
anatomy template (two lung fields, heart, mediastinum, clavicle bands) with
Gaussian noise, then draws catheters as smooth random splines through
class-specific corridors keyed to their insertion route. Class frequencies
default to the strongly imbalanced mix seen clinically (PICC-dominated,
Swan-Ganz rare). Distractor tubes with random geometry emulate the
non-CVC devices (airway/drainage tubes) that make presence detection
non-trivial.

Everything is a pure function of (config, index): the same pair always
produces a bit-identical phantom, so corpus generation can run indices in
any order or in parallel.
"""
from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .imageio import read_annotations_jsonl, read_pgm_image, read_pgm_mask, write_annotations_jsonl, write_pgm
from .raster import (
    ANATOMY_REGIONS,
    PRIOR_CLASSES,
    TYPE_INDICATORS,
    BinaryMask,
    CvcClass,
    GrayImage,
    PolylineAnnotation,
    _blur_array,
    indicator_of,
    rasterize_path,
    rasterize_polyline,
)

# §-free clinical mix: PICC 4249 (split evenly left/right), IJ 1651,
# subclavian 201, Swan-Ganz 192.
_COUNTS = {"PICC": 4249, "IJ": 1651, "SUBCLAVIAN": 201, "SWAN_GANZ": 192}
_TOTAL = sum(_COUNTS.values())

DEFAULT_CLASS_MIX = {
    CvcClass.PICC_LEFT: _COUNTS["PICC"] / (2 * _TOTAL),
    CvcClass.PICC_RIGHT: _COUNTS["PICC"] / (2 * _TOTAL),
    CvcClass.IJ: _COUNTS["IJ"] / _TOTAL,
    CvcClass.SUBCLAVIAN: _COUNTS["SUBCLAVIAN"] / _TOTAL,
    CvcClass.SWAN_GANZ: _COUNTS["SWAN_GANZ"] / _TOTAL,
}


@dataclasses.dataclass(frozen=True)
class PhantomConfig:
    width: int = 128
    height: int = 128
    class_mix: dict = dataclasses.field(default_factory=lambda: dict(DEFAULT_CLASS_MIX))
    p_no_catheter: float = 0.2
    p_multi_catheter: float = 0.08
    p_distractor: float = 0.3
    noise_sigma: float = 0.03
    catheter_contrast: float = 0.25
    catheter_thickness: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 16 or self.height < 16:
            raise ConfigError("phantom resolution must be at least 16x16")
        for name in ("p_no_catheter", "p_multi_catheter", "p_distractor"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if set(self.class_mix) != set(PRIOR_CLASSES):
            raise ConfigError("class_mix must cover exactly the five catheter classes")
        if any(p < 0 for p in self.class_mix.values()):
            raise ConfigError("class_mix probabilities must be >= 0")
        if abs(sum(self.class_mix.values()) - 1.0) > 1e-9:
            raise ConfigError("class_mix must sum to 1")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if self.catheter_thickness < 1:
            raise ConfigError("catheter_thickness must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")

    def to_json_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["class_mix"] = {c.value: p for c, p in self.class_mix.items()}
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "PhantomConfig":
        d = dict(d)
        if "class_mix" in d:
            d["class_mix"] = {CvcClass(k): v for k, v in d["class_mix"].items()}
        return cls(**d)


@dataclasses.dataclass(frozen=True)
class Phantom:
    image_id: str
    image: GrayImage
    catheters: tuple
    distractors: tuple
    anatomy: dict
    presence: bool
    type_flags: dict

    def catheter_classes(self) -> list[CvcClass]:
        return [a.cvc_class for a in self.catheters]


# Anatomy template: (cx, cy, semi_u, semi_v, rotation degrees, intensity delta)
# in normalized coordinates, u rightward and v downward.
_ANATOMY_ELLIPSES = {
    "LUNGS": ([(0.30, 0.46, 0.155, 0.27, 6.0), (0.70, 0.46, 0.155, 0.27, -6.0)], -0.16),
    "HEART": ([(0.555, 0.63, 0.165, 0.145, -15.0)], 0.16),
    "MEDIASTINUM": ([(0.50, 0.42, 0.085, 0.30, 0.0)], 0.12),
    "CLAVICLES": ([(0.30, 0.165, 0.175, 0.028, 8.0), (0.70, 0.165, 0.175, 0.028, -8.0)], 0.14),
}

_BASE_INTENSITY = 0.42

# Catheter corridors: control points from insertion origin to tip, plus the
# (u, v) jitter scale applied to every control point. Routes are what carry
# class identity: IJ drops straight down the right paramediastinal line,
# the Swan-Ganz enters left of it and bows through the heart shadow, the
# subclavian hugs the image-left clavicle before turning down, and the two
# PICC variants run in from either arm along a lower arc.
_CORRIDORS = {
    CvcClass.IJ: (
        [(0.545, 0.04), (0.55, 0.16), (0.555, 0.30), (0.56, 0.42), (0.555, 0.52)],
        (0.012, 0.020),
    ),
    CvcClass.SWAN_GANZ: (
        [
            (0.46, 0.04),
            (0.468, 0.14),
            (0.49, 0.26),
            (0.545, 0.40),
            (0.62, 0.53),
            (0.66, 0.65),
            (0.60, 0.72),
            (0.545, 0.67),
        ],
        (0.014, 0.014),
    ),
    CvcClass.SUBCLAVIAN: (
        [(0.17, 0.195), (0.30, 0.21), (0.42, 0.235), (0.50, 0.30), (0.525, 0.40)],
        (0.015, 0.012),
    ),
    CvcClass.PICC_LEFT: (
        [
            (0.035, 0.30),
            (0.16, 0.315),
            (0.30, 0.325),
            (0.44, 0.335),
            (0.515, 0.41),
            (0.53, 0.52),
            (0.535, 0.60),
        ],
        (0.015, 0.015),
    ),
    CvcClass.PICC_RIGHT: (
        [
            (0.965, 0.30),
            (0.84, 0.315),
            (0.70, 0.325),
            (0.56, 0.335),
            (0.485, 0.41),
            (0.47, 0.52),
            (0.465, 0.60),
        ],
        (0.015, 0.015),
    ),
}


def _catmull_rom(pts: np.ndarray, samples_per_segment: int = 10) -> np.ndarray:
    p = np.vstack([pts[0], pts, pts[-1]])
    pieces = [pts[:1]]
    for i in range(len(pts) - 1):
        p0, p1, p2, p3 = p[i], p[i + 1], p[i + 2], p[i + 3]
        t = np.linspace(0.0, 1.0, samples_per_segment + 1)[1:]
        q = 0.5 * (
            2.0 * p1[None, :]
            + np.outer(t, p2 - p0)
            + np.outer(t * t, 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3)
            + np.outer(t**3, -p0 + 3.0 * p1 - 3.0 * p2 + p3)
        )
        pieces.append(q)
    return np.vstack(pieces)


def _dedupe(pts: np.ndarray) -> np.ndarray:
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-12, axis=1)
    return pts[keep]


def _to_pixels(uv: np.ndarray, width: int, height: int) -> np.ndarray:
    pts = np.column_stack((uv[:, 0] * (width - 1), uv[:, 1] * (height - 1)))
    pts[:, 0] = np.clip(pts[:, 0], 1.0, width - 2.0)
    pts[:, 1] = np.clip(pts[:, 1], 1.0, height - 2.0)
    return _dedupe(pts)


def _sample_catheter_path(cls: CvcClass, rng, width: int, height: int) -> np.ndarray:
    ctrl, (ju, jv) = _CORRIDORS[cls]
    ctrl = np.asarray(ctrl, dtype=np.float64)
    jitter = rng.normal(0.0, 1.0, ctrl.shape) * np.array([ju, jv])
    uv = np.clip(ctrl + jitter, 0.015, 0.985)
    return _to_pixels(_catmull_rom(uv), width, height)


def _sample_distractor_path(rng, width: int, height: int) -> np.ndarray:
    edge = rng.integers(0, 3)  # 0 top, 1 left, 2 right
    if edge == 0:
        start = np.array([rng.uniform(0.15, 0.85), 0.03])
    elif edge == 1:
        start = np.array([0.03, rng.uniform(0.15, 0.75)])
    else:
        start = np.array([0.97, rng.uniform(0.15, 0.75)])
    steps = rng.normal(0.0, 0.13, size=(4, 2)) + (np.array([0.5, 0.55]) - start) * 0.22
    uv = np.clip(np.vstack([start, start + np.cumsum(steps, axis=0)]), 0.03, 0.97)
    return _to_pixels(_catmull_rom(_dedupe(uv)), width, height)


def _ellipse_mask(width, height, cx, cy, su, sv, rot_deg) -> np.ndarray:
    vv, uu = np.mgrid[0:height, 0:width]
    u = uu / (width - 1) - cx
    v = vv / (height - 1) - cy
    th = math.radians(rot_deg)
    ur = u * math.cos(th) + v * math.sin(th)
    vr = -u * math.sin(th) + v * math.cos(th)
    return (ur / su) ** 2 + (vr / sv) ** 2 <= 1.0


def _render_anatomy(rng, width: int, height: int):
    masks = {}
    intensity = np.full((height, width), _BASE_INTENSITY)
    for region in ANATOMY_REGIONS:
        ellipses, delta = _ANATOMY_ELLIPSES[region]
        acc = np.zeros((height, width), dtype=bool)
        for cx, cy, su, sv, rot in ellipses:
            jcx = cx + rng.normal(0.0, 0.008)
            jcy = cy + rng.normal(0.0, 0.008)
            jsu = su * (1.0 + rng.normal(0.0, 0.04))
            jsv = sv * (1.0 + rng.normal(0.0, 0.04))
            jrot = rot + rng.normal(0.0, 2.0)
            acc |= _ellipse_mask(width, height, jcx, jcy, jsu, jsv, jrot)
        masks[region] = BinaryMask(acc)
        intensity += delta * acc
    return masks, intensity


def draw_catheter_classes(config: PhantomConfig, index: int) -> list[CvcClass]:
    """The catheter classes phantom `index` will contain (cheap, no render)."""
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, index)).spawn(4)[1])
    return _draw_classes(config, rng)[0]


def _draw_classes(config: PhantomConfig, rng):
    classes: list[CvcClass] = []
    if rng.random() >= config.p_no_catheter:
        mix_classes = list(PRIOR_CLASSES)
        probs = np.array([config.class_mix[c] for c in mix_classes])
        classes.append(mix_classes[rng.choice(len(mix_classes), p=probs)])
        if rng.random() < config.p_multi_catheter:
            for _ in range(10):
                extra = mix_classes[rng.choice(len(mix_classes), p=probs)]
                if extra != classes[0]:
                    classes.append(extra)
                    break
    n_distractors = 1 if rng.random() < config.p_distractor else 0
    return classes, n_distractors


def generate_phantom(config: PhantomConfig, index: int, force_classes=None) -> Phantom:
    """Render phantom `index`; force_classes overrides the class draw only."""
    streams = np.random.SeedSequence((config.seed, index)).spawn(4)
    anat_rng = np.random.default_rng(streams[0])
    label_rng = np.random.default_rng(streams[1])
    path_rng = np.random.default_rng(streams[2])
    noise_rng = np.random.default_rng(streams[3])
    w, h = config.width, config.height

    masks, intensity = _render_anatomy(anat_rng, w, h)
    classes, n_distractors = _draw_classes(config, label_rng)
    if force_classes is not None:
        classes = list(force_classes)

    image_id = f"phantom_{index:05d}"
    catheters = []
    for cls in classes:
        pts = _sample_catheter_path(cls, path_rng, w, h)
        catheters.append(PolylineAnnotation(points=pts, cvc_class=cls, image_id=image_id))
    distractors = tuple(_sample_distractor_path(path_rng, w, h) for _ in range(n_distractors))

    # organ borders smoothed before the thin structures go in
    intensity = _blur_array(intensity, 0.012 * min(w, h))
    for ann in catheters:
        line = rasterize_polyline(ann, w, h, config.catheter_thickness)
        intensity += config.catheter_contrast * line.data
    for pts in distractors:
        line = rasterize_path(pts, w, h, config.catheter_thickness)
        intensity += config.catheter_contrast * line.data
    if config.noise_sigma > 0:
        intensity += noise_rng.normal(0.0, config.noise_sigma, size=intensity.shape)
    np.clip(intensity, 0.0, 1.0, out=intensity)

    flags = {ind: False for ind in TYPE_INDICATORS}
    for ann in catheters:
        flags[indicator_of(ann.cvc_class)] = True
    return Phantom(
        image_id=image_id,
        image=GrayImage(intensity),
        catheters=tuple(catheters),
        distractors=distractors,
        anatomy=masks,
        presence=len(catheters) > 0,
        type_flags=flags,
    )


def union_catheter_mask(phantom: Phantom, thickness: float) -> BinaryMask:
    """All catheter traces rasterized as one positive class."""
    acc = np.zeros((phantom.image.height, phantom.image.width), dtype=bool)
    for ann in phantom.catheters:
        acc |= rasterize_polyline(ann, phantom.image.width, phantom.image.height, thickness).data
    return BinaryMask(acc)


def generate_corpus(config: PhantomConfig, n: int, out_dir) -> dict:
    """Write n phantoms plus manifest; identical inputs reproduce identical files."""
    if n < 1:
        raise ConfigError("corpus size must be >= 1")
    out = Path(out_dir)
    try:
        (out / "images").mkdir(parents=True, exist_ok=True)
        (out / "anatomy").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create corpus directory {out}: {exc}") from exc

    entries = []
    annotations = []
    for i in range(n):
        ph = generate_phantom(config, i)
        img_rel = f"images/{ph.image_id}.pgm"
        _write_with_context(out / img_rel, ph.image)
        anat_rel = {}
        for region, mask in ph.anatomy.items():
            rel = f"anatomy/{ph.image_id}.{region.lower()}.pgm"
            _write_with_context(out / rel, mask)
            anat_rel[region] = rel
        annotations.extend(ph.catheters)
        entries.append(
            {
                "id": ph.image_id,
                "image": img_rel,
                "anatomy": anat_rel,
                "presence": ph.presence,
                "flags": ph.type_flags,
                "classes": [c.value for c in ph.catheter_classes()],
                "n_distractors": len(ph.distractors),
            }
        )
    write_annotations_jsonl(out / "annotations.jsonl", annotations)
    manifest = {
        "version": 1,
        "n": n,
        "resolution": [config.width, config.height],
        "phantom_config": config.to_json_dict(),
        "entries": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    return manifest


def _write_with_context(path: Path, image) -> None:
    try:
        write_pgm(path, image)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def read_manifest(corpus_dir) -> dict:
    return json.loads((Path(corpus_dir) / "manifest.json").read_text())


def load_corpus(corpus_dir) -> list[Phantom]:
    """Rebuild Phantom records from a corpus directory (8-bit image fidelity)."""
    corpus = Path(corpus_dir)
    manifest = read_manifest(corpus)
    by_image = {}
    for ann in read_annotations_jsonl(corpus / "annotations.jsonl"):
        by_image.setdefault(ann.image_id, []).append(ann)
    phantoms = []
    for e in manifest["entries"]:
        anatomy = {region: read_pgm_mask(corpus / rel) for region, rel in e["anatomy"].items()}
        phantoms.append(
            Phantom(
                image_id=e["id"],
                image=read_pgm_image(corpus / e["image"]),
                catheters=tuple(by_image.get(e["id"], [])),
                distractors=tuple(np.empty((0, 2)) for _ in range(e["n_distractors"])),
                anatomy=anatomy,
                presence=bool(e["presence"]),
                type_flags={k: bool(v) for k, v in e["flags"].items()},
            )
        )
    return phantoms

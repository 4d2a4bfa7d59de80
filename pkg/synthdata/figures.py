"""Procedural persons and garments with exact ground truth.

Every colour is drawn on the 8-bit grid, so rendered images survive PNG
encoding bit-exactly.
"""

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image, ImageDraw

from .api.utils import quantize

PART_NAMES = ('background', 'head', 'torso', 'left_arm', 'right_arm', 'hips', 'left_leg', 'right_leg')
PART_INDEX = {name: index for index, name in enumerate(PART_NAMES)}
TEXTURE_KINDS = ('stripes', 'checker', 'dots', 'solid')


def _color(rng: np.random.Generator, low: int = 0, high: int = 256) -> tuple:
    return tuple(int(v) for v in rng.integers(low, high, size=3))


def _ellipse_polygon(cx, cy, rx, ry, scales, phase) -> tuple:
    angles = phase + 2 * np.pi * np.arange(len(scales)) / len(scales)
    return tuple((float(cx + s * rx * np.cos(a)), float(cy + s * ry * np.sin(a)))
                 for s, a in zip(scales, angles))


@dataclass(frozen=True)
class GarmentTexture:
    kind: str
    primary: tuple
    secondary: tuple
    period: int = 6
    angle: float = 0.0

    @classmethod
    def sample(cls, rng: np.random.Generator) -> 'GarmentTexture':
        kind = TEXTURE_KINDS[int(rng.integers(len(TEXTURE_KINDS)))]
        return cls(kind=kind, primary=_color(rng), secondary=_color(rng),
                   period=int(rng.integers(3, 9)),
                   angle=float(np.round(rng.uniform(0, np.pi), 3)))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'GarmentTexture':
        return cls(kind=data['kind'], primary=tuple(data['primary']),
                   secondary=tuple(data['secondary']), period=int(data['period']),
                   angle=float(data['angle']))


def render_texture(texture: GarmentTexture, size: int) -> np.ndarray:
    """Full-canvas H x W x 3 texture."""
    if texture.kind not in TEXTURE_KINDS:
        raise ValueError(f'Unknown texture kind {texture.kind!r}')
    if texture.period < 2:
        raise ValueError(f'Texture period must be >= 2, got {texture.period}')
    yy, xx = np.mgrid[0:size, 0:size]
    p = texture.period
    if texture.kind == 'stripes':
        coord = xx * np.cos(texture.angle) + yy * np.sin(texture.angle)
        pick = (np.floor(coord / p) % 2).astype(bool)
    elif texture.kind == 'checker':
        pick = ((xx // p + yy // p) % 2).astype(bool)
    elif texture.kind == 'dots':
        pick = ((xx % p - p / 2) ** 2 + (yy % p - p / 2) ** 2) <= (p / 3) ** 2
    else:
        pick = np.zeros((size, size), dtype=bool)
    primary = np.array(texture.primary, dtype=np.float64) / 255.0
    secondary = np.array(texture.secondary, dtype=np.float64) / 255.0
    return np.where(pick[..., None], secondary, primary)


def catalog_image(texture: GarmentTexture, size: int) -> np.ndarray:
    """In-shop style product image: the garment texture in a canonical silhouette on white."""
    canvas = Image.new('L', (size, size), 0)
    outline = _ellipse_polygon(0.5, 0.5, 0.36, 0.42, np.ones(12), np.pi / 12)
    ImageDraw.Draw(canvas).polygon([(x * size, y * size) for x, y in outline], fill=1)
    inside = np.asarray(canvas, dtype=bool)
    return np.where(inside[..., None], render_texture(texture, size), 1.0)


@dataclass(frozen=True)
class Garment:
    texture: GarmentTexture
    image: np.ndarray

    @classmethod
    def from_texture(cls, texture: GarmentTexture, size: int) -> 'Garment':
        return cls(texture=texture, image=catalog_image(texture, size))


@dataclass(frozen=True)
class FigureSpec:
    """Stylised body layout in normalised [0, 1] image coordinates (x right, y down)."""

    size: int
    torso: tuple        # cx, cy, rx, ry
    head: tuple         # cx, cy, r
    hips: tuple         # cx, cy, rx, ry
    left_arm: tuple     # polygon
    right_arm: tuple
    left_leg: tuple
    right_leg: tuple
    skin: tuple
    hair: tuple
    garment: tuple      # top garment polygon, strictly inside the torso ellipse
    bottom_garment: tuple | None = None

    @classmethod
    def sample(cls, rng: np.random.Generator, size: int, two_piece: bool = False) -> 'FigureSpec':
        cx = 0.5 + rng.uniform(-0.04, 0.04)
        cy = rng.uniform(0.45, 0.50)
        rx = rng.uniform(0.18, 0.24)
        ry = rng.uniform(0.22, 0.28)
        r_head = rng.uniform(0.08, 0.11)
        head = (cx, cy - ry - 0.8 * r_head, r_head)
        hips = (cx, cy + 0.85 * ry, 0.85 * rx, rng.uniform(0.07, 0.09))

        def arm(side):
            reach = rng.uniform(0.07, 0.11)
            shoulder_x = cx + side * 0.85 * rx
            hand_x = cx + side * (rx + reach)
            top, bottom = cy - 0.7 * ry, cy + 0.6 * ry
            return ((shoulder_x, top), (shoulder_x + side * 0.06, top),
                    (hand_x + side * 0.05, bottom), (hand_x, bottom))

        def leg(side):
            inner, outer = cx + side * 0.02, cx + side * 0.9 * hips[2]
            top, bottom = hips[1], rng.uniform(0.93, 0.98)
            return ((inner, top), (outer, top), (outer - side * 0.02, bottom), (inner, bottom))

        scales = rng.uniform(0.82, 0.95, size=12)
        garment = _ellipse_polygon(cx, cy, rx, ry, scales, rng.uniform(0, np.pi / 6))
        bottom = None
        if two_piece:
            bottom = _ellipse_polygon(hips[0], hips[1], hips[2], hips[3],
                                      rng.uniform(0.85, 0.95, size=10), 0.0)
        skin = _color(rng, 120, 240)
        hair = _color(rng, 0, 120)
        return cls(size=size, torso=(cx, cy, rx, ry), head=head, hips=hips,
                   left_arm=arm(-1), right_arm=arm(1), left_leg=leg(-1), right_leg=leg(1),
                   skin=skin, hair=hair, garment=garment, bottom_garment=bottom)

    def to_dict(self) -> dict:
        return asdict(self)


class Rendering(NamedTuple):
    person: np.ndarray        # H x W x 3
    pose: np.ndarray          # H x W x 3 pose map D
    mask: np.ndarray          # H x W try-on mask of the top garment, {0, 1}
    alpha: np.ndarray         # H x W subject alpha, {0, 1}
    bottom_mask: np.ndarray | None


def _scaled(points, size):
    return [(x * size, y * size) for x, y in points]


def _polygon_mask(points, size) -> np.ndarray:
    if len(set(points)) < 3:
        raise ValueError('Degenerate garment polygon: fewer than three distinct vertices')
    canvas = Image.new('L', (size, size), 0)
    ImageDraw.Draw(canvas).polygon(_scaled(points, size), fill=1)
    mask = np.asarray(canvas, dtype=bool)
    if not mask.any():
        raise ValueError('Degenerate garment polygon: rasterises to an empty mask')
    return mask


def _ellipse_box(cx, cy, rx, ry, size):
    return [(cx - rx) * size, (cy - ry) * size, (cx + rx) * size, (cy + ry) * size]


def part_labels(spec: FigureSpec) -> np.ndarray:
    """Per-pixel body-part index, painted back to front."""
    size = spec.size
    canvas = Image.new('L', (size, size), PART_INDEX['background'])
    draw = ImageDraw.Draw(canvas)
    draw.polygon(_scaled(spec.left_leg, size), fill=PART_INDEX['left_leg'])
    draw.polygon(_scaled(spec.right_leg, size), fill=PART_INDEX['right_leg'])
    draw.ellipse(_ellipse_box(*spec.hips, size), fill=PART_INDEX['hips'])
    draw.ellipse(_ellipse_box(*spec.torso, size), fill=PART_INDEX['torso'])
    draw.polygon(_scaled(spec.left_arm, size), fill=PART_INDEX['left_arm'])
    draw.polygon(_scaled(spec.right_arm, size), fill=PART_INDEX['right_arm'])
    cx, cy, r = spec.head
    draw.ellipse(_ellipse_box(cx, cy, r, r, size), fill=PART_INDEX['head'])
    return np.asarray(canvas, dtype=np.int64)


def render_pose_map(labels: np.ndarray) -> np.ndarray:
    """Pose map D: R = part index, G/B = part-local normalised x/y inside the part's bounding box."""
    size = labels.shape[0]
    pose = np.zeros((size, size, 3), dtype=np.float64)
    yy, xx = np.mgrid[0:size, 0:size]
    for index in range(1, len(PART_NAMES)):
        part = labels == index
        if not part.any():
            continue
        ys, xs = yy[part], xx[part]
        width = max(xs.max() - xs.min(), 1)
        height = max(ys.max() - ys.min(), 1)
        pose[part, 0] = index / (len(PART_NAMES) - 1)
        pose[part, 1] = (xs - xs.min()) / width
        pose[part, 2] = (ys - ys.min()) / height
    return quantize(pose)


def render_person(spec: FigureSpec, texture: GarmentTexture,
                  bottom_texture: GarmentTexture | None = None) -> Rendering:
    """Rasterise the figure wearing ``texture``; returns (P, D, M, subject alpha, bottom mask)."""
    size = spec.size
    labels = part_labels(spec)
    alpha = (labels > 0).astype(np.float64)

    skin = np.array(spec.skin, dtype=np.float64) / 255.0
    person = np.zeros((size, size, 3), dtype=np.float64)
    person[labels > 0] = skin
    cx, cy, r = spec.head
    hair = Image.new('L', (size, size), 0)
    ImageDraw.Draw(hair).pieslice(_ellipse_box(cx, cy, r, r, size), 180, 360, fill=1)
    hair_mask = np.asarray(hair, dtype=bool) & (labels == PART_INDEX['head'])
    person[hair_mask] = np.array(spec.hair, dtype=np.float64) / 255.0

    mask = _polygon_mask(spec.garment, size) & (labels == PART_INDEX['torso'])
    person = np.where(mask[..., None], render_texture(texture, size), person)

    bottom_mask = None
    if spec.bottom_garment is not None:
        bottom_mask = _polygon_mask(spec.bottom_garment, size) & (labels == PART_INDEX['hips'])
        bottom_texture = bottom_texture or GarmentTexture('solid', (90, 90, 90), (90, 90, 90))
        person = np.where(bottom_mask[..., None], render_texture(bottom_texture, size), person)
        bottom_mask = bottom_mask.astype(np.float64)

    return Rendering(person=person, pose=render_pose_map(labels), mask=mask.astype(np.float64),
                     alpha=alpha, bottom_mask=bottom_mask)

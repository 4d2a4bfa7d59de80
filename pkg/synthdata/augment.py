"""In-the-wild augmentation: background, subject and occluding foreground stacked bottom to top.

Both members of a pseudo-triplet pair get the same background, the same
foreground and the same placement, and the try-on mask loses every pixel the
foreground touches.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from PIL import Image, ImageDraw

from .api.utils import quantize
from .figures import GarmentTexture, render_texture

logger = logging.getLogger(__name__)

BACKGROUND_FAMILIES = ('gradient', 'checker', 'noise')
FOREGROUND_SHAPES = ('ellipse', 'polygon', 'strip')


class PlacementFailure(RuntimeError):
    """No foreground placement satisfied the occlusion bounds within the retry budget."""


@dataclass
class LayeredScene:
    background: np.ndarray          # H x W x 3
    subject: np.ndarray             # H x W x 3
    subject_alpha: np.ndarray       # H x W
    foreground: np.ndarray          # H x W x 3
    foreground_alpha: np.ndarray    # H x W
    offset: tuple = (0, 0)          # (dy, dx) shift applied to the foreground layer

    def check(self):
        size = self.background.shape[:2]
        layers = {
            'subject': self.subject.shape[:2],
            'subject_alpha': self.subject_alpha.shape,
            'foreground': self.foreground.shape[:2],
            'foreground_alpha': self.foreground_alpha.shape,
        }
        for name, shape in layers.items():
            if shape != size:
                raise ValueError(f'Layer {name} has resolution {shape}, background has {size}')
        for name in ('subject_alpha', 'foreground_alpha'):
            alpha = getattr(self, name)
            if alpha.min() < 0.0 or alpha.max() > 1.0:
                raise ValueError(f'{name} must lie in [0, 1]')


def shift_layer(layer: np.ndarray, offset) -> np.ndarray:
    """Translate a layer by (dy, dx) pixels, filling uncovered pixels with zeros."""
    dy, dx = (int(v) for v in offset)
    out = np.zeros_like(layer)
    h, w = layer.shape[:2]
    if abs(dy) >= h or abs(dx) >= w:
        return out
    src_y = slice(max(0, -dy), h - max(0, dy))
    src_x = slice(max(0, -dx), w - max(0, dx))
    dst_y = slice(max(0, dy), h - max(0, -dy))
    dst_x = slice(max(0, dx), w - max(0, -dx))
    out[dst_y, dst_x] = layer[src_y, src_x]
    return out


def composite(scene: LayeredScene) -> np.ndarray:
    """Alpha-over of B, subject and F, in that order."""
    scene.check()
    f_rgb = shift_layer(scene.foreground, scene.offset)
    f_alpha = shift_layer(scene.foreground_alpha, scene.offset)[..., None]
    s_alpha = scene.subject_alpha[..., None]
    under = s_alpha * scene.subject + (1.0 - s_alpha) * scene.background
    return f_alpha * f_rgb + (1.0 - f_alpha) * under


def update_mask(mask: np.ndarray, foreground_alpha: np.ndarray) -> np.ndarray:
    """Pixels under any positive foreground alpha become non-try-on."""
    if mask.shape != foreground_alpha.shape:
        raise ValueError(f'Mask {mask.shape} and foreground alpha {foreground_alpha.shape} differ')
    return np.where(foreground_alpha > 0, 0.0, mask).astype(mask.dtype)


@dataclass(frozen=True)
class BackgroundSpec:
    family: str
    colors: tuple                   # two RGB triples on the 8-bit grid
    cells: int = 4
    angle: float = 0.0
    noise_seed: int = 0

    @classmethod
    def sample(cls, rng: np.random.Generator) -> 'BackgroundSpec':
        family = BACKGROUND_FAMILIES[int(rng.integers(len(BACKGROUND_FAMILIES)))]
        colors = tuple(tuple(int(v) for v in rng.integers(0, 256, size=3)) for _ in range(2))
        return cls(family=family, colors=colors, cells=int(rng.integers(2, 9)),
                   angle=float(np.round(rng.uniform(0, 2 * np.pi), 3)),
                   noise_seed=int(rng.integers(2 ** 31)))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'BackgroundSpec':
        return cls(family=data['family'], colors=tuple(tuple(c) for c in data['colors']),
                   cells=int(data['cells']), angle=float(data['angle']),
                   noise_seed=int(data['noise_seed']))


def gen_background(rng: np.random.Generator | None, spec: BackgroundSpec, size: int) -> np.ndarray:
    """Procedural background; the noise family draws from ``rng`` or, when None, from ``spec.seed``."""
    first, second = (np.array(c, dtype=np.float64) / 255.0 for c in spec.colors)
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    if spec.family == 'gradient':
        coord = (xx - 0.5) * np.cos(spec.angle) + (yy - 0.5) * np.sin(spec.angle)
        weight = np.clip(coord / np.sqrt(0.5) + 0.5, 0.0, 1.0)[..., None]
        image = (1.0 - weight) * first + weight * second
    elif spec.family == 'checker':
        if spec.cells < 1:
            raise ValueError(f'Checker needs at least one cell per side, got {spec.cells}')
        cell = np.arange(size) * spec.cells // size
        parity = (cell[:, None] + cell[None, :]) % 2
        image = np.where(parity[..., None] == 1, second, first)
    elif spec.family == 'noise':
        rng = rng if rng is not None else np.random.default_rng(spec.noise_seed)
        grid = rng.uniform(0.0, 1.0, size=(max(spec.cells, 2), max(spec.cells, 2), 3))
        upsampled = Image.fromarray(np.round(grid * 255).astype(np.uint8)).resize(
            (size, size), Image.Resampling.BILINEAR)
        image = np.asarray(upsampled, dtype=np.float64) / 255.0
    else:
        raise ValueError(f'Unknown background family {spec.family!r}')
    return quantize(image)


@dataclass(frozen=True)
class ForegroundConfig:
    """Occlusion bounds for foreground placement, as a fraction of try-on pixels covered."""

    rho_min: float = 0.0
    rho_max: float = 0.4
    retries: int = 50
    opacity: float = 1.0
    shapes: tuple = FOREGROUND_SHAPES

    def __post_init__(self):
        if not 0.0 <= self.rho_min <= self.rho_max <= 1.0:
            raise ValueError('Occlusion bounds must satisfy 0 <= rho_min <= rho_max <= 1')
        if not 0.0 < self.opacity <= 1.0:
            raise ValueError('Foreground opacity must lie in (0, 1]')
        if self.retries < 1:
            raise ValueError('Retry budget must be positive')


@dataclass(frozen=True)
class ForegroundSpec:
    """A realised occluder: shape centred on the canvas, then shifted by ``offset``."""

    shape: str                      # ellipse | polygon | strip | none
    params: tuple = ()
    texture: dict = field(default_factory=dict)
    offset: tuple = (0, 0)
    opacity: float = 1.0

    @classmethod
    def transparent(cls) -> 'ForegroundSpec':
        return cls(shape='none')

    @classmethod
    def sample(cls, rng: np.random.Generator, size: int, config: ForegroundConfig) -> 'ForegroundSpec':
        shape = config.shapes[int(rng.integers(len(config.shapes)))]
        if shape == 'ellipse':
            params = tuple(float(v) for v in np.round(rng.uniform(0.08, 0.25, size=2) * size, 2))
        elif shape == 'polygon':
            vertices = int(rng.integers(3, 8))
            angles = np.sort(rng.uniform(0, 2 * np.pi, size=vertices))
            radii = rng.uniform(0.06, 0.22, size=vertices) * size
            params = tuple((float(round(r * np.cos(a), 2)), float(round(r * np.sin(a), 2)))
                           for r, a in zip(radii, angles))
        else:
            params = (float(np.round(rng.uniform(0.05, 0.15) * size, 2)),
                      float(np.round(rng.uniform(0, np.pi), 3)))
        half = size // 2
        offset = (int(rng.integers(-half, half + 1)), int(rng.integers(-half, half + 1)))
        return cls(shape=shape, params=params, texture=GarmentTexture.sample(rng).to_dict(),
                   offset=offset, opacity=config.opacity)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'ForegroundSpec':
        params = tuple(tuple(p) if isinstance(p, list) else p for p in data['params'])
        texture = GarmentTexture.from_dict(data['texture']).to_dict() if data['texture'] else {}
        return cls(shape=data['shape'], params=params, texture=texture,
                   offset=tuple(data['offset']), opacity=float(data['opacity']))


def render_foreground(spec: ForegroundSpec, size: int) -> tuple:
    """RGB and alpha of the occluder, unshifted (centred on the canvas)."""
    if spec.shape == 'none':
        return np.zeros((size, size, 3)), np.zeros((size, size))
    canvas = Image.new('L', (size, size), 0)
    draw = ImageDraw.Draw(canvas)
    c = size / 2
    if spec.shape == 'ellipse':
        rx, ry = spec.params
        draw.ellipse([c - rx, c - ry, c + rx, c + ry], fill=1)
    elif spec.shape == 'polygon':
        draw.polygon([(c + x, c + y) for x, y in spec.params], fill=1)
    elif spec.shape == 'strip':
        width, angle = spec.params
        dx, dy = np.cos(angle) * size, np.sin(angle) * size
        nx, ny = -np.sin(angle) * width / 2, np.cos(angle) * width / 2
        draw.polygon([(c - dx + nx, c - dy + ny), (c + dx + nx, c + dy + ny),
                      (c + dx - nx, c + dy - ny), (c - dx - nx, c - dy - ny)], fill=1)
    else:
        raise ValueError(f'Unknown foreground shape {spec.shape!r}')
    alpha = np.asarray(canvas, dtype=np.float64) * spec.opacity
    rgb = render_texture(GarmentTexture.from_dict(spec.texture), size)
    return rgb, alpha


def occlusion_fraction(mask: np.ndarray, foreground_alpha: np.ndarray) -> float:
    """Fraction of try-on pixels with positive foreground alpha (0 for an empty mask)."""
    area = float((mask > 0).sum())
    if area == 0:
        return 0.0
    return float(((mask > 0) & (foreground_alpha > 0)).sum()) / area


def gen_foreground(rng: np.random.Generator, config: ForegroundConfig, mask: np.ndarray) -> tuple:
    """Sample an occluder whose coverage of ``mask`` lies within the configured bounds.

    Returns (rgb, alpha, spec); both layers are already shifted into place.
    """
    size = mask.shape[0]
    if config.rho_max == 0.0:
        spec = ForegroundSpec.transparent()
        rgb, alpha = render_foreground(spec, size)
        return rgb, alpha, spec
    for attempt in range(config.retries):
        spec = ForegroundSpec.sample(rng, size, config)
        rgb, alpha = render_foreground(spec, size)
        rgb, alpha = shift_layer(rgb, spec.offset), shift_layer(alpha, spec.offset)
        rho = occlusion_fraction(mask, alpha)
        if config.rho_min <= rho <= config.rho_max:
            return rgb, alpha, spec
        logger.debug('Foreground attempt %d rejected: occlusion %.3f', attempt, rho)
    raise PlacementFailure(
        f'No foreground within occlusion [{config.rho_min}, {config.rho_max}] after {config.retries} tries')


@dataclass(frozen=True)
class AugmentationRecord:
    seed: int
    background: BackgroundSpec
    foreground: ForegroundSpec
    occlusion: float

    def to_dict(self) -> dict:
        return {
            'seed': self.seed,
            'background': self.background.to_dict(),
            'foreground': self.foreground.to_dict(),
            'occlusion': self.occlusion,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'AugmentationRecord':
        return cls(seed=int(data['seed']),
                   background=BackgroundSpec.from_dict(data['background']),
                   foreground=ForegroundSpec.from_dict(data['foreground']),
                   occlusion=float(data['occlusion']))


class AugmentedPair(NamedTuple):
    person: np.ndarray
    person_prime: np.ndarray
    mask: np.ndarray
    record: AugmentationRecord
    occluder: np.ndarray            # shifted foreground alpha


def _check_pair(person, person_prime, subject_alpha, mask):
    if person.shape != person_prime.shape:
        raise ValueError(f'P {person.shape} and P\' {person_prime.shape} differ in resolution')
    if subject_alpha.shape != person.shape[:2] or mask.shape != person.shape[:2]:
        raise ValueError('Subject alpha and mask must match the image resolution')


def _apply(person, person_prime, subject_alpha, mask, background, fg_rgb, fg_alpha, record):
    def layered(subject):
        return quantize(composite(LayeredScene(background, subject, subject_alpha, fg_rgb, fg_alpha)))

    return AugmentedPair(person=layered(person), person_prime=layered(person_prime),
                         mask=update_mask(mask, fg_alpha), record=record, occluder=fg_alpha)


def augment_pair(person: np.ndarray, person_prime: np.ndarray, subject_alpha: np.ndarray,
                 mask: np.ndarray, rng: np.random.Generator,
                 config: ForegroundConfig | None = None) -> AugmentedPair:
    """Composite the same background and occluder around P and P'."""
    _check_pair(person, person_prime, subject_alpha, mask)
    config = config or ForegroundConfig()
    seed = int(rng.integers(2 ** 63))
    child = np.random.default_rng(seed)
    size = person.shape[0]
    background_spec = BackgroundSpec.sample(child)
    background = gen_background(None, background_spec, size)
    fg_rgb, fg_alpha, fg_spec = gen_foreground(child, config, mask)
    record = AugmentationRecord(seed=seed, background=background_spec, foreground=fg_spec,
                                occlusion=occlusion_fraction(mask, fg_alpha))
    return _apply(person, person_prime, subject_alpha, mask, background, fg_rgb, fg_alpha, record)


def replay_augmentation(record: AugmentationRecord, person: np.ndarray, person_prime: np.ndarray,
                        subject_alpha: np.ndarray, mask: np.ndarray) -> AugmentedPair:
    """Rebuild an augmented pair from its record alone."""
    _check_pair(person, person_prime, subject_alpha, mask)
    size = person.shape[0]
    background = gen_background(None, record.background, size)
    fg_rgb, fg_alpha = render_foreground(record.foreground, size)
    fg_rgb = shift_layer(fg_rgb, record.foreground.offset)
    fg_alpha = shift_layer(fg_alpha, record.foreground.offset)
    return _apply(person, person_prime, subject_alpha, mask, background, fg_rgb, fg_alpha, record)

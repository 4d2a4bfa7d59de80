"""Pseudo-triplet datasets on disk.

Layout::

    <root>/manifest.json
    <root>/<id>/person.png person_prime.png garment.png pose.png mask.png aug.json [occluder.png]
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from tqdm import tqdm

from .api.utils import load_png, save_png, sha256_file
from .augment import AugmentationRecord, ForegroundConfig, PlacementFailure, augment_pair
from .figures import FigureSpec, Garment, GarmentTexture, render_person
from .teachers import TryOnTeacher, get_teacher

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
MANIFEST_VERSION = 1
SPLITS = ('train', 'val', 'test')
SPLIT_FRACTIONS = (0.8, 0.1, 0.1)
IMAGE_FILES = ('person', 'person_prime', 'garment', 'pose', 'mask')


class ManifestError(ValueError):
    pass


class ManifestHashMismatch(ManifestError):
    pass


@dataclass
class TryOnTriplet:
    sample_id: str
    split: str
    person: np.ndarray              # P (ground truth), H x W x 3
    garment: np.ndarray             # C, catalog image of the garment worn in P
    person_prime: np.ndarray        # P', same person in another garment
    pose: np.ndarray                # D, shared by P and P'
    mask: np.ndarray                # M, H x W in {0, 1}
    garment_texture: GarmentTexture
    prime_texture: GarmentTexture
    record: AugmentationRecord | None = None
    occluder: np.ndarray | None = None

    def differs_only_inside_mask(self) -> bool:
        outside = self.mask[..., None] == 0
        return bool(np.array_equal(np.where(outside, self.person, 0.0),
                                   np.where(outside, self.person_prime, 0.0)))


def assign_splits(ids: list, rng: np.random.Generator) -> dict:
    """80/10/10 split over a seeded permutation; the train share absorbs rounding."""
    order = [ids[i] for i in rng.permutation(len(ids))]
    n_val = int(round(len(ids) * SPLIT_FRACTIONS[1]))
    n_test = int(round(len(ids) * SPLIT_FRACTIONS[2]))
    n_train = len(ids) - n_val - n_test
    splits = {}
    for sample_id in order[:n_train]:
        splits[sample_id] = 'train'
    for sample_id in order[n_train:n_train + n_val]:
        splits[sample_id] = 'val'
    for sample_id in order[n_train + n_val:]:
        splits[sample_id] = 'test'
    return splits


def _sample_prime_texture(rng, texture: GarmentTexture) -> GarmentTexture:
    while True:
        other = GarmentTexture.sample(rng)
        if other != texture:
            return other


def _on_white(image: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    return alpha[..., None] * image + (1.0 - alpha[..., None])


def generate_sample(sample_id: str, seed: int, out_dir: Path, resolution: int, augment: bool,
                    foreground: ForegroundConfig, teacher: TryOnTeacher, two_piece: bool = False) -> dict:
    """Render, re-dress and optionally augment one sample; returns its manifest entry."""
    rng = np.random.default_rng(seed)
    spec = FigureSpec.sample(rng, resolution, two_piece=two_piece)
    texture = GarmentTexture.sample(rng)
    prime_texture = _sample_prime_texture(rng, texture)
    bottom_texture = GarmentTexture.sample(rng) if two_piece else None
    aug_rng = np.random.default_rng(int(rng.integers(2 ** 63)))

    rendering = render_person(spec, texture, bottom_texture)
    garment = Garment.from_texture(texture, resolution)
    person_prime = teacher.try_on(rendering.person, rendering.pose, rendering.mask,
                                  Garment.from_texture(prime_texture, resolution))

    record = None
    occluder = None
    if augment:
        pair = augment_pair(rendering.person, person_prime, rendering.alpha, rendering.mask,
                            aug_rng, foreground)
        person, person_prime, mask = pair.person, pair.person_prime, pair.mask
        record, occluder = pair.record, pair.occluder
    else:
        person = _on_white(rendering.person, rendering.alpha)
        person_prime = _on_white(person_prime, rendering.alpha)
        mask = rendering.mask

    sample_dir = out_dir / sample_id
    images = {
        'person': person,
        'person_prime': person_prime,
        'garment': garment.image,
        'pose': rendering.pose,
        'mask': mask,
    }
    if occluder is not None:
        images['occluder'] = occluder
    if rendering.bottom_mask is not None:
        images['bottom_mask'] = rendering.bottom_mask
    for name, image in images.items():
        save_png(image, sample_dir / f'{name}.png')
    aug = {
        'augmented': augment,
        'record': record.to_dict() if record else None,
        'figure': spec.to_dict(),
    }
    (sample_dir / 'aug.json').write_text(json.dumps(aug, indent=2, sort_keys=True))

    files = {}
    for name in [*images, 'aug']:
        filename = f'{name}.json' if name == 'aug' else f'{name}.png'
        files[name] = {
            'path': f'{sample_id}/{filename}',
            'sha256': sha256_file(sample_dir / filename),
        }
    return {
        'id': sample_id,
        'seed': int(seed),
        'files': files,
        'garment': texture.to_dict(),
        'garment_prime': prime_texture.to_dict(),
        'bottom_garment': bottom_texture.to_dict() if bottom_texture else None,
        'occlusion': record.occlusion if record else 0.0,
        'wild_foreground': bool(record and record.foreground.shape != 'none'),
    }


def build_dataset(count: int, seed: int, augment: bool, out_dir, resolution: int = 64,
                  codec: str = 'identity', rho_max: float = 0.4, teacher: str = 'synthetic',
                  workers: int = 1, progress: bool = False, two_piece: bool = False,
                  teacher_command: str | None = None) -> dict:
    """Generate ``count`` pseudo-triplets under ``out_dir`` and write the manifest.

    Samples whose foreground cannot be placed are skipped and logged.
    """
    if count < 1:
        raise ValueError(f'count must be >= 1, got {count}')
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    seeds = rng.integers(2 ** 31, size=count)
    ids = [f'{i:06d}' for i in range(count)]
    foreground = ForegroundConfig(rho_max=rho_max)
    tryon_teacher = get_teacher(teacher, teacher_command)

    def work(args):
        sample_id, sample_seed = args
        try:
            return generate_sample(sample_id, int(sample_seed), out_dir, resolution, augment,
                                   foreground, tryon_teacher, two_piece)
        except PlacementFailure as exc:
            logger.warning('Skipping sample %s: %s', sample_id, exc)
            return None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(tqdm(pool.map(work, zip(ids, seeds)), total=count,
                            desc='gen-data', disable=not progress))

    samples = [entry for entry in results if entry is not None]
    skipped = [sample_id for sample_id, entry in zip(ids, results) if entry is None]
    splits = assign_splits([entry['id'] for entry in samples], rng)
    for entry in samples:
        entry['split'] = splits[entry['id']]

    manifest = {
        'version': MANIFEST_VERSION,
        'seed': int(seed),
        'count': count,
        'resolution': resolution,
        'codec': {'name': codec, 'resolution': resolution},
        'augment': augment,
        'rho_max': rho_max,
        'teacher': teacher,
        'two_piece': two_piece,
        'samples': samples,
        'skipped': skipped,
        'splits': {name: [e['id'] for e in samples if e['split'] == name] for name in SPLITS},
    }
    (out_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    logger.info('Wrote %d samples (%d skipped) to %s', len(samples), len(skipped), out_dir)
    return manifest


def load_manifest(root) -> dict:
    path = Path(root) / MANIFEST_NAME
    if not path.is_file():
        raise ManifestError(f'No dataset manifest at {path}')
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f'Corrupt dataset manifest {path}: {exc}') from exc
    if manifest.get('version') != MANIFEST_VERSION:
        raise ManifestError(f'Unsupported manifest version {manifest.get("version")}')
    return manifest


def _manifest_entry(manifest: dict, sample_id: str) -> dict:
    for entry in manifest['samples']:
        if entry['id'] == sample_id:
            return entry
    raise ManifestError(f'Sample {sample_id} is not listed in the manifest')


def load_triplet(path, manifest: dict | None = None) -> TryOnTriplet:
    """Load one sample directory, verifying every file against the manifest hashes."""
    path = Path(path)
    root = path.parent
    manifest = manifest if manifest is not None else load_manifest(root)
    entry = _manifest_entry(manifest, path.name)

    for name, meta in entry['files'].items():
        file_path = root / meta['path']
        if not file_path.is_file():
            raise ManifestError(f'Missing dataset file {file_path}')
        if sha256_file(file_path) != meta['sha256']:
            raise ManifestHashMismatch(f'Hash mismatch for {file_path}')

    try:
        images = {name: load_png(root / entry['files'][name]['path'])
                  for name in ('person', 'person_prime', 'garment', 'pose')}
        mask = load_png(root / entry['files']['mask']['path'], mode='L')
        occluder = None
        if 'occluder' in entry['files']:
            occluder = load_png(root / entry['files']['occluder']['path'], mode='L')
    except ValueError as exc:
        raise ManifestError(str(exc)) from exc

    aug = json.loads((root / entry['files']['aug']['path']).read_text())
    record = AugmentationRecord.from_dict(aug['record']) if aug.get('record') else None
    return TryOnTriplet(
        sample_id=entry['id'], split=entry['split'], mask=mask, record=record, occluder=occluder,
        garment_texture=GarmentTexture.from_dict(entry['garment']),
        prime_texture=GarmentTexture.from_dict(entry['garment_prime']),
        **images,
    )


def load_split(root, split: str) -> list:
    if split not in SPLITS:
        raise ValueError(f'Unknown split {split!r}; expected one of {SPLITS}')
    root = Path(root)
    manifest = load_manifest(root)
    return [load_triplet(root / sample_id, manifest) for sample_id in manifest['splits'][split]]


def dataset_stats(root) -> dict:
    """Per-split counts of person images, pairs, wild backgrounds and wild foregrounds."""
    manifest = load_manifest(root)
    stats = {}
    for split in SPLITS:
        entries = [e for e in manifest['samples'] if e['split'] == split]
        stats[split] = {
            'images': 2 * len(entries),
            'pairs': len(entries),
            'wild_backgrounds': len(entries) if manifest['augment'] else 0,
            'wild_foregrounds': sum(1 for e in entries if e['wild_foreground']),
        }
    stats['total'] = {key: sum(stats[s][key] for s in SPLITS) for key in stats['train']}
    return stats

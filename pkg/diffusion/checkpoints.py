"""Checkpoint directories: manifest.json plus one parameter blob per section."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch

from .codec import LatentCodec, get_codec
from .config import TrainConfig, config_from_snapshot
from .garment_encoder import GarmentEncoder, build_encoder, freeze, parameter_hash
from .schedule import NoiseSchedule
from .unet import BLOCK_ORDER, CHANNEL_LAYOUT, TryOnUNet, build_unet

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
SECTIONS = {
    'tryon_unet': 'tryon_unet.pt',
    'garment_encoder': 'garment_encoder.pt',
}


class CheckpointError(ValueError):
    pass


class CheckpointNotFound(FileNotFoundError):
    pass


@dataclass
class LoadedCheckpoint:
    path: Path
    step: int
    config: TrainConfig
    model: TryOnUNet
    encoder: GarmentEncoder
    codec: LatentCodec
    manifest: dict

    @property
    def schedule(self) -> NoiseSchedule:
        return self.config.schedule


def checkpoint_dir(run_dir, step: int) -> Path:
    return Path(run_dir) / 'checkpoints' / f'step-{step:06d}'


def save_checkpoint(path, model: TryOnUNet, encoder: GarmentEncoder, config: TrainConfig,
                    step: int, codec: LatentCodec) -> dict:
    """Write a checkpoint directory and return its manifest."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), path / SECTIONS['tryon_unet'])
    torch.save(encoder.state_dict(), path / SECTIONS['garment_encoder'])
    manifest = {
        'step': int(step),
        'config': config.to_dict(),
        'codec': codec.describe(),
        'channel_layout': list(CHANNEL_LAYOUT),
        'block_order': list(BLOCK_ORDER),
        'hashes': {
            'tryon_unet': parameter_hash(model),
            'garment_encoder': parameter_hash(encoder),
        },
        'files': dict(SECTIONS),
    }
    (path / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    logger.info('Saved checkpoint at step %d to %s', step, path)
    return manifest


def read_manifest(path) -> dict:
    manifest_path = Path(path) / MANIFEST_NAME
    if not manifest_path.is_file():
        raise CheckpointNotFound(f'No checkpoint manifest at {manifest_path}')
    try:
        return json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f'Corrupt checkpoint manifest {manifest_path}: {exc}') from exc


def load_checkpoint(path) -> LoadedCheckpoint:
    """Load and verify a checkpoint: layout, block order and section hashes must match.

    A run directory resolves to its latest checkpoint.
    """
    path = Path(path)
    if not (path / MANIFEST_NAME).is_file() and (path / 'checkpoints').is_dir():
        path = latest_checkpoint(path)
    manifest = read_manifest(path)
    if tuple(manifest.get('channel_layout', ())) != CHANNEL_LAYOUT:
        raise CheckpointError(
            f'Channel layout {manifest.get("channel_layout")} does not match {list(CHANNEL_LAYOUT)}')
    if tuple(manifest.get('block_order', ())) != BLOCK_ORDER:
        raise CheckpointError(
            f'Block order {manifest.get("block_order")} does not match {list(BLOCK_ORDER)}')

    config = config_from_snapshot(manifest['config'])
    codec = get_codec(manifest['codec']['name'], manifest['codec']['resolution'])
    model = build_unet(config.unet_config(codec.channels), seed=config.seed, dtype=config.torch_dtype)
    encoder = build_encoder(config.encoder_config, seed=config.seed).to(config.torch_dtype)

    for section, module in (('tryon_unet', model), ('garment_encoder', encoder)):
        blob = path / SECTIONS[section]
        if not blob.is_file():
            raise CheckpointNotFound(f'Missing checkpoint section {blob}')
        module.load_state_dict(torch.load(blob, map_location='cpu', weights_only=True))
        actual = parameter_hash(module)
        if actual != manifest['hashes'][section]:
            raise CheckpointError(f'Hash mismatch for section {section} in {path}')

    return LoadedCheckpoint(path=path, step=int(manifest['step']), config=config,
                            model=model.eval(), encoder=freeze(encoder), codec=codec,
                            manifest=manifest)


def list_checkpoints(run_dir) -> list:
    root = Path(run_dir) / 'checkpoints'
    if not root.is_dir():
        return []
    return sorted(p for p in root.iterdir() if (p / MANIFEST_NAME).is_file())


def latest_checkpoint(run_dir) -> Path:
    checkpoints = list_checkpoints(run_dir)
    if not checkpoints:
        raise CheckpointNotFound(f'No checkpoints under {run_dir}')
    return checkpoints[-1]

"""Training loop for the mask-free try-on U-Net.

The garment encoder is warmed up once on the training garments, frozen, and
never touched again; only the U-Net is optimised.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from django.conf import settings
from tqdm import tqdm

from synthdata.dataset import load_manifest, load_split

from .checkpoints import checkpoint_dir, save_checkpoint
from .codec import get_codec
from .config import TrainConfig
from .garment_encoder import encode_garment, parameter_hash, pretrain_warmup
from .losses import localization_loss, ldm_loss, total_loss
from .schedule import forward_sample, sample_timesteps
from .unet import ConditioningBundle, build_unet, predict_noise

logger = logging.getLogger(__name__)

LOG_NAME = 'train_log.jsonl'
NAN_DUMP_NAME = 'nan_dump.json'


class FrozenEncoderViolation(RuntimeError):
    """The garment encoder's parameters changed during U-Net training."""


class NonFiniteLossError(FloatingPointError):
    def __init__(self, message: str, step: int, batch_ids: list, dump_path: Path):
        super().__init__(message)
        self.step = step
        self.batch_ids = batch_ids
        self.dump_path = dump_path


@dataclass
class TrainingResult:
    run_dir: Path
    log_path: Path
    encoder_hash: str
    steps: int
    checkpoints: list = field(default_factory=list)
    final_ldm: float | None = None


def images_to_tensor(images, dtype=torch.float32) -> torch.Tensor:
    """Stack H x W x C arrays into a B x C x H x W tensor."""
    array = np.stack([np.asarray(image) for image in images])
    return torch.from_numpy(array).permute(0, 3, 1, 2).contiguous().to(dtype)


def stack_triplets(triplets: list, dtype=torch.float32) -> dict:
    if not triplets:
        raise ValueError('Cannot stack an empty list of triplets.')
    return {
        'ids': [t.sample_id for t in triplets],
        'person': images_to_tensor([t.person for t in triplets], dtype),
        'person_prime': images_to_tensor([t.person_prime for t in triplets], dtype),
        'garment': images_to_tensor([t.garment for t in triplets], dtype),
        'pose': images_to_tensor([t.pose for t in triplets], dtype),
        'mask': torch.from_numpy(np.stack([t.mask for t in triplets])).to(dtype),
    }


def _check_dataset(config: TrainConfig) -> dict:
    if not config.dataset:
        raise ValueError('Training needs a dataset path (config key "dataset").')
    manifest = load_manifest(config.dataset)
    if manifest['resolution'] != config.resolution:
        raise ValueError(f'Dataset resolution {manifest["resolution"]} does not match '
                         f'config resolution {config.resolution}')
    if bool(manifest['augment']) != config.augment:
        kind = 'an augmented' if config.augment else 'a clean'
        raise ValueError(f'Arm {config.arm} trains on {kind} dataset; {config.dataset} is not')
    return manifest


def _dump_non_finite(run_dir: Path, step: int, ids: list, t, ldm, ar) -> Path:
    dump_path = run_dir / NAN_DUMP_NAME
    dump_path.write_text(json.dumps({
        'step': step,
        'batch_ids': ids,
        'timesteps': [int(v) for v in t],
        'ldm': float(ldm),
        'ar': float(ar),
    }, indent=2, sort_keys=True))
    return dump_path


def train(config: TrainConfig, run_name: str | None = None, progress: bool = False,
          on_checkpoint=None, device: str | None = None) -> TrainingResult:
    """Run one training job; writes checkpoints and a JSONL loss log under the run directory.

    ``on_checkpoint(step, path, manifest)`` is called after every saved checkpoint.
    """
    _check_dataset(config)
    device = torch.device(device or settings.TRYON['DEVICE'])
    dtype = config.torch_dtype
    run_dir = Path(config.output_dir) / (run_name or f'{config.arm}-seed{config.seed}')
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / 'config.json').write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True))

    triplets = load_split(config.dataset, 'train')
    if not triplets:
        raise ValueError(f'Dataset {config.dataset} has no training samples.')
    data = stack_triplets(triplets, dtype)

    warmup = pretrain_warmup(data['garment'], config.warmup_steps, config.encoder_config,
                             seed=config.seed, lr=config.warmup_lr)
    encoder = warmup.encoder.to(dtype)
    encoder_hash = parameter_hash(encoder)
    tokens = encode_garment(data['garment'], encoder).to(device)

    codec = get_codec(config.codec, config.resolution)
    z0_all = codec.encode(data['person']).to(device)
    source_all = codec.encode(data['person_prime']).to(device)
    pose_all = codec.encode(data['pose']).to(device)
    mask_all = data['mask'].to(device)

    schedule = config.schedule
    model = build_unet(config.unet_config(codec.channels), seed=config.seed, dtype=dtype).to(device)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    rng = np.random.default_rng(config.seed)
    generator = torch.Generator().manual_seed(config.seed)

    result = TrainingResult(run_dir=run_dir, log_path=run_dir / LOG_NAME,
                            encoder_hash=encoder_hash, steps=config.steps)

    def checkpoint(step):
        if parameter_hash(encoder) != encoder_hash:
            raise FrozenEncoderViolation(f'Garment encoder changed before step {step}')
        path = checkpoint_dir(run_dir, step)
        manifest = save_checkpoint(path, model, encoder, config, step, codec)
        result.checkpoints.append(path)
        if on_checkpoint is not None:
            on_checkpoint(step, path, manifest)

    n = len(triplets)
    logger.info('Training %s: %d samples, %d steps, lambda_ar=%g', run_dir.name, n, config.steps,
                config.lambda_ar)
    with open(result.log_path, 'w') as log:
        for step in tqdm(range(1, config.steps + 1), desc=run_dir.name, disable=not progress):
            idx = torch.from_numpy(rng.integers(0, n, size=config.batch_size))
            t = sample_timesteps(rng, schedule.T, config.batch_size)
            eps = torch.randn(z0_all[idx].shape, generator=generator, dtype=dtype).to(device)
            z_t = forward_sample(z0_all[idx], t, eps, schedule)
            bundle = ConditioningBundle(z_t, pose_all[idx], source_all[idx])
            eps_hat, record = predict_noise(bundle, t, tokens[idx], model)

            ldm = ldm_loss(eps, eps_hat)
            ar = localization_loss(record, mask_all[idx])
            if not (torch.isfinite(ldm) and torch.isfinite(ar)):
                ids = [data['ids'][int(i)] for i in idx]
                dump_path = _dump_non_finite(run_dir, step, ids, t, ldm, ar)
                raise NonFiniteLossError(f'Non-finite loss at step {step}; batch dumped to {dump_path}',
                                         step, ids, dump_path)
            losses = total_loss(ldm, ar, config.lambda_ar)

            optimizer.zero_grad()
            losses.total.backward()
            optimizer.step()

            log.write(json.dumps({'step': step, **losses.as_record()}, sort_keys=True) + '\n')
            result.final_ldm = float(ldm)
            if step % config.checkpoint_every == 0 and step != config.steps:
                checkpoint(step)

    checkpoint(config.steps)
    logger.info('Finished %s; final L_LDM %s', run_dir.name, result.final_ldm)
    return result


def read_train_log(path) -> list:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]

"""Unpaired evaluation of a checkpoint on a synthetic test split."""

import json
import logging
from pathlib import Path

import numpy as np
import torch
from tqdm import tqdm

from diffusion.api.utils import tensor_to_image
from diffusion.checkpoints import MANIFEST_NAME, latest_checkpoint, read_manifest
from diffusion.garment_encoder import encode_garment
from diffusion.losses import attention_outside_mass
from diffusion.sampler import SamplerConfig, TryOnPipeline
from diffusion.schedule import forward_sample, sample_timesteps
from diffusion.training import stack_triplets
from diffusion.unet import ConditioningBundle, predict_noise
from synthdata.dataset import load_manifest, load_split

from .metrics import (KID_BOOTSTRAP, KID_SCALE, RandomConvFeatureExtractor, extract_features, fid,
                      kid_with_error, region_mae)

logger = logging.getLogger(__name__)

KERNEL_SPEC = {'family': 'polynomial', 'degree': 3, 'gamma': '1/q', 'coef0': 1.0}


def unpaired_order(n: int) -> list:
    """Garment index for each sample: a cyclic shift so nobody gets their own garment back (n > 1)."""
    return [(i + 1) % n for i in range(n)]


def score_sets(real: torch.Tensor, generated: torch.Tensor, extractor: RandomConvFeatureExtractor,
               max_block_size: int = 1024) -> dict:
    """FID and KID between two B x 3 x H x W image sets."""
    x = extract_features(real, extractor)
    y = extract_features(generated, extractor)
    kid_value, kid_se = kid_with_error(x, y, max_block_size=max_block_size)
    return {
        'extractor': x.extractor_id,
        'samples': {'real': x.m, 'generated': y.m},
        'fid': fid(x, y),
        'kid': {
            'value': kid_value * KID_SCALE,
            'se': kid_se * KID_SCALE,
            'n_bootstrap': KID_BOOTSTRAP,
            'scale': KID_SCALE,
            'kernel': KERNEL_SPEC,
            'max_block_size': max_block_size,
        },
    }


def attention_outside_report(pipeline: TryOnPipeline, data: dict, seed: int = 0,
                             batch_size: int = 16) -> dict:
    """Mean attention mass outside M on noised test batches conditioned on the true garment."""
    rng = np.random.default_rng(seed)
    generator = torch.Generator().manual_seed(seed)
    dtype = next(pipeline.model.parameters()).dtype
    codec, schedule = pipeline.codec, pipeline.schedule
    per_block = {}
    batches = 0
    with torch.no_grad():
        for start in range(0, len(data['ids']), batch_size):
            window = slice(start, start + batch_size)
            z0 = codec.encode(data['person'][window].to(dtype))
            t = sample_timesteps(rng, schedule.T, z0.shape[0])
            eps = torch.randn(z0.shape, generator=generator, dtype=dtype)
            bundle = ConditioningBundle(forward_sample(z0, t, eps, schedule),
                                        codec.encode(data['pose'][window].to(dtype)),
                                        codec.encode(data['person_prime'][window].to(dtype)))
            tokens = encode_garment(data['garment'][window], pipeline.encoder).to(dtype)
            _, record = predict_noise(bundle, t, tokens, pipeline.model)
            for block, value in attention_outside_mass(record, data['mask'][window].to(dtype)).items():
                per_block[block] = per_block.get(block, 0.0) + value
            batches += 1
    per_block = {block: value / batches for block, value in per_block.items()}
    return {'mean': float(np.mean(list(per_block.values()))), 'per_block': per_block}


def evaluate(checkpoint, dataset_root, split: str = 'test', steps: int = 50, seed: int = 0,
             mode: str = 'deterministic', progress: bool = False, max_block_size: int = 1024) -> dict:
    """Generate unpaired try-ons for every sample of ``split`` and score them against the real persons."""
    pipeline = TryOnPipeline.from_checkpoint(checkpoint, SamplerConfig(steps=steps, mode=mode))
    manifest = load_manifest(dataset_root)
    triplets = load_split(dataset_root, split)
    if len(triplets) < 2:
        raise ValueError(f'Split {split} of {dataset_root} has {len(triplets)} samples; need at least 2')

    data = stack_triplets(triplets, torch.float64)
    order = unpaired_order(len(triplets))
    generated = []
    for i in tqdm(range(len(triplets)), desc='eval', disable=not progress):
        result = pipeline.try_on(data['person'][i], data['pose'][i], data['garment'][order[i]],
                                 seed=seed + i)
        generated.append(result.to(torch.float64))
    generated = torch.stack(generated)

    extractor = RandomConvFeatureExtractor(manifest['resolution'], seed=0)
    scores = score_sets(data['person'], generated, extractor, max_block_size)

    inside, outside, occluder_errors = [], [], []
    for i, triplet in enumerate(triplets):
        output = tensor_to_image(generated[i])
        inside.append(region_mae(output, triplet.person, triplet.mask, inside=True))
        outside.append(region_mae(output, triplet.person, triplet.mask, inside=False))
        if triplet.occluder is not None and (triplet.occluder > 0).any():
            occluder_errors.append(region_mae(output, triplet.person, triplet.occluder, inside=True))
    inside, outside = np.array(inside), np.array(outside)

    report = {
        'checkpoint': str(checkpoint),
        'step': _checkpoint_step(checkpoint),
        'dataset': str(dataset_root),
        'split': split,
        'wild': bool(manifest['augment']),
        'sampler': {'steps': steps, 'mode': mode, 'seed': seed, 'init': 'noise'},
        'unpaired': True,
        **scores,
        'mae_inside': float(inside.mean()),
        'mae_outside': float(outside.mean()),
        'outside_below_inside': float((outside < inside).mean()),
        'occluder_mae': float(np.mean(occluder_errors)) if occluder_errors else None,
        'attention_outside': attention_outside_report(pipeline, data, seed=seed),
    }
    logger.info('Evaluated %s on %s/%s: FID %.4f, KID x100 %.4f', checkpoint, dataset_root, split,
                report['fid'], report['kid']['value'])
    return report


def _checkpoint_step(checkpoint) -> int:
    path = Path(checkpoint)
    if not (path / MANIFEST_NAME).is_file():
        path = latest_checkpoint(path)
    return int(read_manifest(path)['step'])


def evaluate_wild_and_shop(checkpoint, wild_root, shop_root=None, **kwargs) -> dict:
    """Evaluate on the augmented test split and, when given, on the clean one."""
    reports = {'wild': evaluate(checkpoint, wild_root, **kwargs)}
    if shop_root:
        reports['shop'] = evaluate(checkpoint, shop_root, **kwargs)
    return reports


def write_report(report: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True))
    return path

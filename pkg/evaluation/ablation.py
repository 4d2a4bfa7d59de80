"""Three-arm ablation: Base, +WildAug and +WildAug+L_ar, trained and scored on the same synthetic data."""

import json
import logging
from pathlib import Path

from diffusion.config import ARMS, load_train_config
from diffusion.training import train
from synthdata.dataset import build_dataset

from .evaluate import evaluate_wild_and_shop

logger = logging.getLogger(__name__)

ARM_LABELS = {
    'base': 'Base',
    'wild_aug': '+WildAug',
    'wild_aug+ar': '+WildAug+L_ar',
}


def _fmt(value, digits: int = 4) -> str:
    return '-' if value is None else f'{value:.{digits}f}'


def ablation_table(rows: list) -> str:
    """Markdown table with one row per arm, scored on the wild test split."""
    lines = [
        '| Arm | FID | KID x100 | MAE outside | MAE inside | Occluder MAE | Attention outside |',
        '|---|---|---|---|---|---|---|',
    ]
    for row in rows:
        wild = row['reports']['wild']
        kid = wild['kid']
        kid_text = _fmt(kid['value'])
        if kid['se'] is not None:
            kid_text += f" ± {_fmt(kid['se'])}"
        lines.append(
            f"| {ARM_LABELS[row['arm']]} | {_fmt(wild['fid'])} | {kid_text} | "
            f"{_fmt(wild['mae_outside'])} | {_fmt(wild['mae_inside'])} | "
            f"{_fmt(wild['occluder_mae'])} | {_fmt(wild['attention_outside']['mean'])} |")
    return '\n'.join(lines) + '\n'


def run_ablation(out_dir, profile: str = 'desk', count: int = 200, seed: int = 0,
                 steps: int | None = None, eval_steps: int = 50, config_path=None,
                 progress: bool = False, device: str | None = None) -> dict:
    """Generate wild and clean datasets, train every arm, evaluate each final checkpoint."""
    out_dir = Path(out_dir)
    base_config = load_train_config(config_path, profile=profile, seed=seed, steps=steps)
    resolution = base_config.resolution

    wild_root, shop_root = out_dir / 'data' / 'wild', out_dir / 'data' / 'shop'
    build_dataset(count, seed, augment=True, out_dir=wild_root, resolution=resolution,
                  codec=base_config.codec, progress=progress)
    build_dataset(count, seed, augment=False, out_dir=shop_root, resolution=resolution,
                  codec=base_config.codec, progress=progress)

    rows = []
    for arm in ARMS:
        dataset = shop_root if arm == 'base' else wild_root
        config = base_config.with_arm(arm, dataset=str(dataset), output_dir=str(out_dir / 'runs'))
        logger.info('Ablation arm %s: augment=%s lambda_ar=%g', arm, config.augment, config.lambda_ar)
        result = train(config, run_name=arm, progress=progress, device=device)
        reports = evaluate_wild_and_shop(result.run_dir, wild_root, shop_root,
                                         steps=eval_steps, seed=seed, progress=progress)
        rows.append({'arm': arm, 'run_dir': str(result.run_dir), 'reports': reports})

    summary = {'profile': profile, 'count': count, 'seed': seed, 'arms': rows}
    (out_dir / 'ablation.json').write_text(json.dumps(summary, indent=2, sort_keys=True))
    (out_dir / 'ablation.md').write_text(ablation_table(rows))
    logger.info('Ablation written to %s', out_dir)
    return summary

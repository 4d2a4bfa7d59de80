from unittest.mock import patch

import pytest

from diffusion.training import TrainingResult
from evaluation.ablation import ablation_table, run_ablation


def _report(fid=1.0, se=None, occluder=None):
    return {
        'fid': fid,
        'kid': {'value': 0.5, 'se': se},
        'mae_inside': 0.3,
        'mae_outside': 0.1,
        'occluder_mae': occluder,
        'attention_outside': {'mean': 0.25},
    }


@pytest.mark.unit
def test_ablation_table_rows():
    rows = [
        {'arm': 'base', 'reports': {'wild': _report(fid=3.0)}},
        {'arm': 'wild_aug+ar', 'reports': {'wild': _report(fid=1.5, se=0.01, occluder=0.2)}},
    ]
    lines = ablation_table(rows).splitlines()

    assert lines[0].startswith('| Arm | FID | KID x100')
    assert lines[2] == '| Base | 3.0000 | 0.5000 | 0.1000 | 0.3000 | - | 0.2500 |'
    assert lines[3].startswith('| +WildAug+L_ar | 1.5000 | 0.5000 ± 0.0100 |')


@pytest.mark.unit
def test_run_ablation_trains_every_arm(tmp_path):
    """Base trains on clean data, both wild arms on augmented data; L_ar only in the last arm."""
    configs = []

    def fake_train(config, run_name, progress=False, device=None):
        configs.append(config)
        run_dir = tmp_path / 'runs' / run_name
        return TrainingResult(run_dir=run_dir, log_path=run_dir / 'train.log', encoder_hash='h', steps=2)

    reports = {'wild': _report(), 'shop': _report()}
    with patch('evaluation.ablation.build_dataset') as mock_build, \
            patch('evaluation.ablation.train', side_effect=fake_train), \
            patch('evaluation.ablation.evaluate_wild_and_shop', return_value=reports) as mock_eval:
        summary = run_ablation(tmp_path, profile='smoke', count=10, steps=2, eval_steps=1)

    assert [call.kwargs['augment'] for call in mock_build.call_args_list] == [True, False]
    assert [c.arm for c in configs] == ['base', 'wild_aug', 'wild_aug+ar']
    assert configs[0].dataset.endswith('shop')
    assert configs[1].dataset.endswith('wild') and configs[2].dataset.endswith('wild')
    assert configs[0].lambda_ar == 0 and configs[1].lambda_ar == 0
    assert configs[2].lambda_ar > 0
    assert mock_eval.call_count == 3
    assert [row['arm'] for row in summary['arms']] == ['base', 'wild_aug', 'wild_aug+ar']
    assert (tmp_path / 'ablation.json').is_file()
    assert len((tmp_path / 'ablation.md').read_text().splitlines()) == 5

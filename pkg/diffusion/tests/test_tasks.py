from pathlib import Path
from unittest.mock import patch

import pytest

from diffusion.api.tasks import config_for_run, run_training
from diffusion.models import TrainingRun
from diffusion.training import TrainingResult
from synthdata.models import SyntheticDataset


@pytest.mark.django_db
def test_config_for_run_merges_dataset_and_arm():
    dataset = SyntheticDataset.objects.create(name='d', count=1, augment=False, root='/data/shop')
    run = TrainingRun.objects.create(name='r', arm='base', profile='smoke', dataset=dataset,
                                     overrides={'steps': 3, 'lambda_ar': 5.0})
    config = config_for_run(run)
    assert config.dataset == '/data/shop'
    assert config.steps == 3
    assert config.lambda_ar == 0.0
    assert config.augment is False


@pytest.mark.django_db
def test_run_training_registers_checkpoints():
    """Each saved checkpoint becomes a Checkpoint row; the run ends as done."""
    run = TrainingRun.objects.create(name='r', arm='wild_aug+ar', profile='smoke', overrides={'steps': 4})

    def fake_train(config, run_name, on_checkpoint):
        for step in (2, 4):
            on_checkpoint(step, Path(f'/runs/{run_name}/step-{step}'),
                          {'hashes': {'tryon_unet': f'u{step}', 'garment_encoder': 'enc'}})
        return TrainingResult(run_dir=Path(f'/runs/{run_name}'), log_path=Path('/runs/log'),
                              encoder_hash='enc', steps=4, final_ldm=0.12)

    with patch('diffusion.api.tasks.train', side_effect=fake_train):
        run_training(run.id)

    run.refresh_from_db()
    assert run.status == 'done'
    assert run.final_ldm == pytest.approx(0.12)
    assert run.config['steps'] == 4
    assert run.finished_at is not None
    assert list(run.checkpoints.values_list('step', 'unet_hash')) == [(2, 'u2'), (4, 'u4')]


@pytest.mark.django_db
def test_run_training_invalid_config_fails_run():
    run = TrainingRun.objects.create(name='r', arm='base', profile='smoke', overrides={'bogus': 1})
    with patch('diffusion.api.tasks.train') as mock_train:
        run_training(run.id)
    mock_train.assert_not_called()
    run.refresh_from_db()
    assert run.status == 'failed'
    assert 'bogus' in run.error


@pytest.mark.django_db
def test_run_training_records_exceptions():
    run = TrainingRun.objects.create(name='r', arm='base', profile='smoke')
    with patch('diffusion.api.tasks.train', side_effect=ValueError('no training samples')):
        run_training(run.id)
    run.refresh_from_db()
    assert run.status == 'failed'
    assert run.error == 'no training samples'

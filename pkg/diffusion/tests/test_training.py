import json
from unittest.mock import patch

import pytest
import torch

from diffusion.checkpoints import list_checkpoints
from diffusion.training import (LOG_NAME, FrozenEncoderViolation, NonFiniteLossError,
                                read_train_log, stack_triplets, train)
from synthdata.dataset import load_split


@pytest.mark.unit
def test_training_log_has_one_record_per_step(trained_run):
    """Each step logs L_LDM, L_ar, the total and lambda_ar."""
    records = read_train_log(trained_run.log_path)
    assert [r['step'] for r in records] == [1, 2, 3, 4]
    for record in records:
        assert set(record) == {'step', 'ldm', 'ar', 'total', 'lambda_ar'}
        assert record['total'] == pytest.approx(record['ldm'] + record['lambda_ar'] * record['ar'])
        assert 0.0 <= record['ar'] <= 1.0
    assert trained_run.final_ldm == pytest.approx(records[-1]['ldm'])


@pytest.mark.unit
def test_run_directory_holds_config_snapshot(trained_run):
    config = json.loads((trained_run.run_dir / 'config.json').read_text())
    assert config['profile'] == 'smoke'
    assert config['steps'] == 4
    assert trained_run.log_path.name == LOG_NAME


@pytest.mark.unit
def test_stack_triplets_is_channels_first(wild_dataset):
    data = stack_triplets(load_split(wild_dataset, 'test'), torch.float64)
    assert data['person'].shape[1:] == (3, 16, 16)
    assert data['mask'].shape[1:] == (16, 16)
    assert data['person'].dtype == torch.float64
    with pytest.raises(ValueError):
        stack_triplets([])


@pytest.mark.unit
def test_zero_steps_saves_initial_checkpoint(wild_dataset, tmp_path, smoke_config):
    result = train(smoke_config(wild_dataset, tmp_path, steps=0), run_name='init', device='cpu')
    assert [p.name for p in list_checkpoints(result.run_dir)] == ['step-000000']
    assert read_train_log(result.log_path) == []


@pytest.mark.unit
def test_arm_must_match_dataset_kind(wild_dataset, tmp_path, smoke_config):
    """The base arm refuses an augmented dataset."""
    with pytest.raises(ValueError):
        train(smoke_config(wild_dataset, tmp_path, arm='base'), device='cpu')


@pytest.mark.unit
def test_resolution_must_match_dataset(wild_dataset, tmp_path, smoke_config):
    with pytest.raises(ValueError):
        train(smoke_config(wild_dataset, tmp_path, resolution=32), device='cpu')


@pytest.mark.unit
def test_non_finite_loss_dumps_batch(wild_dataset, tmp_path, smoke_config):
    """A NaN loss stops training and dumps the offending batch ids."""
    nan = torch.tensor(float('nan'), requires_grad=True)
    with patch('diffusion.training.ldm_loss', return_value=nan):
        with pytest.raises(NonFiniteLossError) as exc_info:
            train(smoke_config(wild_dataset, tmp_path), run_name='nan', device='cpu')

    error = exc_info.value
    assert error.step == 1
    dump = json.loads(error.dump_path.read_text())
    assert dump['batch_ids'] == error.batch_ids
    assert len(dump['batch_ids']) == 4


@pytest.mark.unit
def test_encoder_change_is_detected(wild_dataset, tmp_path, smoke_config):
    with patch('diffusion.training.parameter_hash', side_effect=['before', 'after']):
        with pytest.raises(FrozenEncoderViolation):
            train(smoke_config(wild_dataset, tmp_path, steps=0), run_name='drift', device='cpu')


@pytest.mark.unit
def test_lambda_zero_still_logs_localization(wild_dataset, tmp_path, smoke_config):
    config = smoke_config(wild_dataset, tmp_path, arm='wild_aug', steps=2)
    result = train(config, run_name='noar', device='cpu')
    records = read_train_log(result.log_path)
    assert all(r['lambda_ar'] == 0.0 for r in records)
    assert all(r['total'] == pytest.approx(r['ldm']) for r in records)


@pytest.mark.unit
def test_identical_runs_write_identical_logs(wild_dataset, tmp_path, smoke_config):
    """Same config and seed give a byte-identical training log."""
    config = smoke_config(wild_dataset, tmp_path, steps=3)
    first = train(config, run_name='first', device='cpu')
    second = train(config, run_name='second', device='cpu')
    assert first.log_path.read_bytes() == second.log_path.read_bytes()
    assert len(read_train_log(first.log_path)) == 3

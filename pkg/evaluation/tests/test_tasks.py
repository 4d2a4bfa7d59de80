import json
from pathlib import Path
from unittest.mock import patch

import pytest

from diffusion.models import Checkpoint, TrainingRun
from evaluation.api.tasks import run_evaluation
from evaluation.models import EvaluationReport
from synthdata.models import SyntheticDataset


@pytest.fixture
def report():
    dataset = SyntheticDataset.objects.create(name='wild', count=20, root='/tmp/wild', status='done')
    run = TrainingRun.objects.create(name='ar', arm='wild_aug+ar', profile='smoke', status='done')
    Checkpoint.objects.create(run=run, step=4, path='/tmp/ckpt', unet_hash='a' * 64, encoder_hash='b' * 64)
    with patch('evaluation.signals.run_evaluation'):
        return EvaluationReport.objects.create(run=run, dataset=dataset, steps=3, seed=1)


@pytest.mark.django_db
def test_run_evaluation_stores_payload(report, tryon_output):
    payload = {'fid': 2.5, 'kid': {'value': 0.1, 'se': None}}
    with patch('evaluation.api.tasks.evaluate', return_value=payload) as mock_evaluate:
        run_evaluation(report.id)

    mock_evaluate.assert_called_once_with('/tmp/ckpt', '/tmp/wild', split='test', steps=3, seed=1)
    report.refresh_from_db()
    assert report.status == 'done'
    assert report.checkpoint.step == 4
    assert report.payload == payload
    assert Path(report.path).parent == tryon_output / 'reports'
    assert json.loads(Path(report.path).read_text())['fid'] == 2.5


@pytest.mark.django_db
def test_run_evaluation_records_failure(report):
    with patch('evaluation.api.tasks.evaluate', side_effect=ValueError('too few samples')):
        run_evaluation(report.id)

    report.refresh_from_db()
    assert report.status == 'failed'
    assert 'too few samples' in report.error


@pytest.mark.django_db
def test_run_evaluation_without_checkpoint(report):
    report.run.checkpoints.all().delete()
    report.checkpoint = None
    report.save()

    with patch('evaluation.api.tasks.evaluate') as mock_evaluate:
        run_evaluation(report.id)

    mock_evaluate.assert_not_called()
    report.refresh_from_db()
    assert report.status == 'failed'


@pytest.mark.django_db
def test_run_evaluation_missing_report():
    with patch('evaluation.api.tasks.evaluate') as mock_evaluate:
        run_evaluation(999)
    mock_evaluate.assert_not_called()

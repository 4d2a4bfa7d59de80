from unittest.mock import patch

import pytest
from django.urls import reverse

from diffusion.models import Checkpoint, TrainingRun


@pytest.mark.django_db
def test_run_list_unauthenticated(api_client):
    assert api_client.get(reverse('run-list')).status_code == 401


@pytest.mark.django_db
def test_run_list_shows_checkpoints(authenticated_client):
    """Runs are listed with their checkpoints and arm label."""
    run = TrainingRun.objects.create(name='wild', arm='wild_aug')
    Checkpoint.objects.create(run=run, step=100, path='/tmp/ckpt', unet_hash='a' * 64, encoder_hash='b' * 64)

    response = authenticated_client.get(reverse('run-list'))

    assert response.status_code == 200
    assert response.data[0]['arm_display'] == '+WildAug'
    assert [c['step'] for c in response.data[0]['checkpoints']] == [100]


@pytest.mark.django_db
def test_run_create_requires_staff(authenticated_client):
    response = authenticated_client.post(reverse('run-list'), {'name': 'r', 'arm': 'base'}, format='json')
    assert response.status_code == 403


@pytest.mark.django_db
def test_run_create_queues_training(admin_authenticated_client, django_capture_on_commit_callbacks):
    """A valid run is stored and queued on the training queue after commit."""
    payload = {'name': 'ar-run', 'arm': 'wild_aug+ar', 'profile': 'smoke', 'overrides': {'steps': 10}}
    with patch('diffusion.signals.run_training') as mock_job:
        with django_capture_on_commit_callbacks(execute=True):
            response = admin_authenticated_client.post(reverse('run-list'), payload, format='json')

    assert response.status_code == 201
    run = TrainingRun.objects.get(id=response.data['id'])
    assert run.overrides == {'steps': 10}
    mock_job.delay.assert_called_once_with(run.id)


@pytest.mark.django_db
@pytest.mark.parametrize('overrides', [{'steps': -1}, {'learning_rate': 0.1}, {'lr': 'fast'}])
def test_run_create_rejects_invalid_overrides(admin_authenticated_client, overrides):
    payload = {'name': 'bad', 'arm': 'base', 'profile': 'smoke', 'overrides': overrides}
    response = admin_authenticated_client.post(reverse('run-list'), payload, format='json')
    assert response.status_code == 400
    assert 'overrides' in response.data


@pytest.mark.django_db
def test_run_detail(authenticated_client):
    run = TrainingRun.objects.create(name='detail', arm='base', profile='smoke')
    response = authenticated_client.get(reverse('run-detail', kwargs={'run_id': run.id}))
    assert response.status_code == 200
    assert response.data['name'] == 'detail'
    assert response.data['reports'] == []


@pytest.mark.django_db
def test_run_detail_not_found(authenticated_client):
    assert authenticated_client.get(reverse('run-detail', kwargs={'run_id': 999})).status_code == 404


@pytest.mark.django_db
def test_latest_checkpoint_and_str():
    run = TrainingRun.objects.create(name='r', arm='wild_aug+ar')
    assert run.latest_checkpoint is None
    for step in (2, 4):
        Checkpoint.objects.create(run=run, step=step, path=f'/c/{step}', unet_hash='u', encoder_hash='e')
    assert run.latest_checkpoint.step == 4
    assert str(run) == 'r (+WildAug+L_ar)'
    assert str(run.latest_checkpoint) == 'r @ step 4'

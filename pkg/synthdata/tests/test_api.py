from unittest.mock import patch

import numpy as np
import pytest
from django.urls import reverse

from synthdata.api.utils import save_png
from synthdata.models import SyntheticDataset


@pytest.mark.django_db
def test_dataset_list_unauthenticated(api_client):
    """Listing datasets requires authentication."""
    response = api_client.get(reverse('dataset-list'))
    assert response.status_code == 401


@pytest.mark.django_db
def test_dataset_list_authenticated(authenticated_client):
    """Authenticated users see every dataset with its kind."""
    SyntheticDataset.objects.create(name='wild', count=10, augment=True)
    SyntheticDataset.objects.create(name='shop', count=10, augment=False)

    response = authenticated_client.get(reverse('dataset-list'))

    assert response.status_code == 200
    assert {item['name']: item['kind'] for item in response.data} == {'wild': 'wild', 'shop': 'shop'}


@pytest.mark.django_db
def test_dataset_create_requires_staff(authenticated_client):
    response = authenticated_client.post(reverse('dataset-list'), {'name': 'x', 'count': 5}, format='json')
    assert response.status_code == 403


@pytest.mark.django_db
def test_dataset_create_queues_generation(admin_authenticated_client, django_capture_on_commit_callbacks):
    """Creating a dataset enqueues the generation job after commit."""
    with patch('synthdata.signals.generate_dataset') as mock_job:
        with django_capture_on_commit_callbacks(execute=True):
            response = admin_authenticated_client.post(
                reverse('dataset-list'), {'name': 'wild-200', 'count': 200, 'rho_max': 0.3}, format='json')

    assert response.status_code == 201
    dataset = SyntheticDataset.objects.get(id=response.data['id'])
    assert dataset.status == 'pending'
    mock_job.delay.assert_called_once_with(dataset.id)


@pytest.mark.django_db
@pytest.mark.parametrize('payload', [
    {'name': 'x', 'count': 0},
    {'name': 'x', 'count': 5, 'rho_max': 1.5},
    {'name': 'x', 'count': 5, 'codec': 'vae'},
    {'name': 'x', 'count': 5, 'codec': 'pool2', 'resolution': 36},
])
def test_dataset_create_invalid(admin_authenticated_client, payload):
    response = admin_authenticated_client.post(reverse('dataset-list'), payload, format='json')
    assert response.status_code == 400


@pytest.mark.django_db
def test_sample_file_served(authenticated_client, tmp_path):
    """Whitelisted sample files are streamed as PNG."""
    save_png(np.zeros((4, 4, 3)), tmp_path / '000001' / 'person.png')
    dataset = SyntheticDataset.objects.create(name='d', count=1, root=str(tmp_path), status='done')

    url = reverse('dataset-sample-file', kwargs={
        'dataset_id': dataset.id, 'sample_id': '000001', 'filename': 'person.png'})
    response = authenticated_client.get(url)

    assert response.status_code == 200
    assert response['Content-Type'] == 'image/png'
    assert b''.join(response.streaming_content)[:8] == b'\x89PNG\r\n\x1a\n'


@pytest.mark.django_db
@pytest.mark.parametrize('sample_id,filename', [
    ('000001', 'manifest.json'),
    ('..', 'person.png'),
    ('000002', 'person.png'),
])
def test_sample_file_not_found(authenticated_client, tmp_path, sample_id, filename):
    save_png(np.zeros((4, 4, 3)), tmp_path / '000001' / 'person.png')
    dataset = SyntheticDataset.objects.create(name='d', count=1, root=str(tmp_path))
    url = reverse('dataset-sample-file', kwargs={
        'dataset_id': dataset.id, 'sample_id': sample_id, 'filename': filename})
    assert authenticated_client.get(url).status_code == 404


@pytest.mark.django_db
def test_sample_file_unknown_dataset(authenticated_client):
    url = reverse('dataset-sample-file', kwargs={
        'dataset_id': 999, 'sample_id': '000001', 'filename': 'person.png'})
    assert authenticated_client.get(url).status_code == 404


@pytest.mark.django_db
def test_dataset_str():
    dataset = SyntheticDataset.objects.create(name='demo', count=12, augment=False)
    assert str(dataset) == 'demo (shop, 12)'

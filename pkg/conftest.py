import pytest
from django.contrib.auth import get_user_model
from rest_framework.test import APIClient

from diffusion.config import load_train_config
from diffusion.training import train
from synthdata.dataset import build_dataset

User = get_user_model()

SMOKE_RESOLUTION = 16


@pytest.fixture(autouse=True)
def tryon_output(settings, tmp_path):
    """Point the try-on output root at a per-test directory."""
    root = tmp_path / 'tryon'
    settings.TRYON = {**settings.TRYON, 'OUTPUT_ROOT': str(root), 'DEVICE': 'cpu'}
    return root


@pytest.fixture
def api_client():
    """Provide APIClient instance."""
    return APIClient()


@pytest.fixture
def user():
    """Create a regular user."""
    return User.objects.create_user(
        username='researcher',
        email='researcher@test.com',
        password='TestPassword123!',
    )


@pytest.fixture
def admin_user():
    """Create an admin user."""
    return User.objects.create_superuser(
        username='admin',
        email='admin@test.com',
        password='AdminPassword123!',
    )


@pytest.fixture
def authenticated_client(api_client, user):
    """Provide authenticated APIClient."""
    api_client.force_authenticate(user=user)
    return api_client


@pytest.fixture
def admin_authenticated_client(api_client, admin_user):
    """Provide admin authenticated APIClient."""
    api_client.force_authenticate(user=admin_user)
    return api_client


@pytest.fixture(scope='session')
def wild_dataset(tmp_path_factory):
    """Augmented smoke-resolution dataset shared by the whole session (16/2/2 split)."""
    root = tmp_path_factory.mktemp('wild')
    build_dataset(count=20, seed=7, augment=True, out_dir=root, resolution=SMOKE_RESOLUTION)
    return root


@pytest.fixture(scope='session')
def shop_dataset(tmp_path_factory):
    """Clean counterpart of ``wild_dataset``."""
    root = tmp_path_factory.mktemp('shop')
    build_dataset(count=20, seed=7, augment=False, out_dir=root, resolution=SMOKE_RESOLUTION)
    return root


def _smoke_config(dataset, output_dir, **overrides):
    values = {'steps': 4, 'warmup_steps': 2, 'checkpoint_every': 2, **overrides}
    return load_train_config(profile='smoke', dataset=str(dataset), output_dir=str(output_dir), **values)


@pytest.fixture
def smoke_config():
    """Build a short smoke-profile training config: ``smoke_config(dataset, output_dir, **overrides)``."""
    return _smoke_config


@pytest.fixture(scope='session')
def trained_run(wild_dataset, tmp_path_factory):
    """A four-step smoke training run with checkpoints at steps 2 and 4."""
    config = _smoke_config(wild_dataset, tmp_path_factory.mktemp('runs'))
    return train(config, run_name='smoke', device='cpu')

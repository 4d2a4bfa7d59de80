import logging
from pathlib import Path

from django.conf import settings
from django_rq import job

from ..dataset import build_dataset, dataset_stats
from ..models import SyntheticDataset

logger = logging.getLogger(__name__)


def dataset_root(dataset: SyntheticDataset) -> Path:
    return Path(settings.TRYON['OUTPUT_ROOT']) / 'datasets' / f'{dataset.id:05d}'


@job('default')
def generate_dataset(dataset_id):
    """Background job that renders a synthetic dataset and records its statistics."""
    try:
        dataset = SyntheticDataset.objects.get(id=dataset_id)
    except SyntheticDataset.DoesNotExist:
        logger.error('SyntheticDataset %s does not exist. Task aborted.', dataset_id)
        return

    root = Path(dataset.root) if dataset.root else dataset_root(dataset)
    dataset.status = 'running'
    dataset.root = str(root)
    dataset.save(update_fields=['status', 'root'])
    try:
        build_dataset(count=dataset.count, seed=dataset.seed, augment=dataset.augment, out_dir=root,
                      resolution=dataset.resolution, codec=dataset.codec, rho_max=dataset.rho_max,
                      two_piece=dataset.two_piece)
    except Exception as exc:
        logger.error('Dataset %s generation failed: %s', dataset_id, exc, exc_info=True)
        dataset.status = 'failed'
        dataset.error = str(exc)
        dataset.save(update_fields=['status', 'error'])
        return

    dataset.stats = dataset_stats(root)
    dataset.status = 'done'
    dataset.save(update_fields=['stats', 'status'])

import logging

from django.utils import timezone
from django_rq import job

from ..config import ConfigError, load_train_config
from ..models import Checkpoint, TrainingRun
from ..training import train

logger = logging.getLogger(__name__)


def config_for_run(run: TrainingRun):
    """Profile defaults, the run's overrides, then its arm and dataset."""
    overrides = dict(run.overrides)
    if run.dataset_id and run.dataset.root:
        overrides['dataset'] = run.dataset.root
    return load_train_config(profile=run.profile, **{**overrides, 'arm': run.arm})


@job('training')
def run_training(run_id):
    """Background job that trains one run and registers its checkpoints."""
    try:
        run = TrainingRun.objects.get(id=run_id)
    except TrainingRun.DoesNotExist:
        logger.error('TrainingRun %s does not exist. Task aborted.', run_id)
        return

    try:
        config = config_for_run(run)
    except ConfigError as exc:
        _fail(run, f'Invalid configuration:\n{exc}')
        return

    run.status = 'running'
    run.config = config.to_dict()
    run.save(update_fields=['status', 'config'])

    def register(step, path, manifest):
        Checkpoint.objects.update_or_create(
            run=run, step=step,
            defaults={
                'path': str(path),
                'unet_hash': manifest['hashes']['tryon_unet'],
                'encoder_hash': manifest['hashes']['garment_encoder'],
            },
        )

    try:
        result = train(config, run_name=f'run-{run.id:05d}', on_checkpoint=register)
    except Exception as exc:
        logger.error('Training run %s failed: %s', run_id, exc, exc_info=True)
        _fail(run, str(exc))
        return

    run.status = 'done'
    run.run_dir = str(result.run_dir)
    run.encoder_hash = result.encoder_hash
    run.final_ldm = result.final_ldm
    run.finished_at = timezone.now()
    run.save(update_fields=['status', 'run_dir', 'encoder_hash', 'final_ldm', 'finished_at'])


def _fail(run: TrainingRun, message: str):
    run.status = 'failed'
    run.error = message
    run.finished_at = timezone.now()
    run.save(update_fields=['status', 'error', 'finished_at'])

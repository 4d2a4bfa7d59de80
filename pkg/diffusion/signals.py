from django.db import transaction
from django.db.models.signals import post_save
from django.dispatch import receiver

from .api.tasks import run_training
from .models import TrainingRun


@receiver(post_save, sender=TrainingRun)
def trigger_training(sender, instance, created, **kwargs):
    """Queue training after TrainingRun creation."""
    if created:
        transaction.on_commit(lambda: run_training.delay(instance.id))

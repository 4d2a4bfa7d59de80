from django.db import transaction
from django.db.models.signals import post_save
from django.dispatch import receiver

from .api.tasks import run_evaluation
from .models import EvaluationReport


@receiver(post_save, sender=EvaluationReport)
def trigger_evaluation(sender, instance, created, **kwargs):
    """Queue evaluation after EvaluationReport creation."""
    if created:
        transaction.on_commit(lambda: run_evaluation.delay(instance.id))

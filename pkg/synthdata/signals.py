from django.db import transaction
from django.db.models.signals import post_save
from django.dispatch import receiver

from .api.tasks import generate_dataset
from .models import SyntheticDataset


@receiver(post_save, sender=SyntheticDataset)
def trigger_generation(sender, instance, created, **kwargs):
    """Queue dataset generation once the row is committed."""
    if created:
        transaction.on_commit(lambda: generate_dataset.delay(instance.id))

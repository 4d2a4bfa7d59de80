from django.db import models


class SyntheticDataset(models.Model):
    """A generated pseudo-triplet dataset living under the try-on output root."""

    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('done', 'Done'),
        ('failed', 'Failed'),
    ]

    name = models.CharField(max_length=255)
    count = models.PositiveIntegerField()
    seed = models.PositiveIntegerField(default=0)
    augment = models.BooleanField(default=True)
    resolution = models.PositiveIntegerField(default=64)
    codec = models.CharField(max_length=20, default='identity')
    rho_max = models.FloatField(default=0.4)
    two_piece = models.BooleanField(default=False)
    root = models.CharField(max_length=500, blank=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')
    error = models.TextField(blank=True)
    stats = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        kind = 'wild' if self.augment else 'shop'
        return f'{self.name} ({kind}, {self.count})'

    class Meta:
        ordering = ['-created_at']

from django.db import models


class TrainingRun(models.Model):
    """One training run of the mask-free try-on model for a single ablation arm."""

    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('done', 'Done'),
        ('failed', 'Failed'),
    ]
    ARM_CHOICES = [
        ('base', 'Base'),
        ('wild_aug', '+WildAug'),
        ('wild_aug+ar', '+WildAug+L_ar'),
    ]
    PROFILE_CHOICES = [
        ('smoke', 'Smoke'),
        ('desk', 'Desk'),
        ('full', 'Full'),
        ('paper', 'Full (alias)'),
    ]

    name = models.CharField(max_length=255)
    arm = models.CharField(max_length=20, choices=ARM_CHOICES, default='wild_aug+ar')
    profile = models.CharField(max_length=20, choices=PROFILE_CHOICES, default='desk')
    overrides = models.JSONField(default=dict, blank=True)
    config = models.JSONField(default=dict, blank=True)
    dataset = models.ForeignKey(
        'synthdata.SyntheticDataset', null=True, blank=True,
        on_delete=models.SET_NULL, related_name='runs')
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')
    error = models.TextField(blank=True)
    run_dir = models.CharField(max_length=500, blank=True)
    encoder_hash = models.CharField(max_length=64, blank=True)
    final_ldm = models.FloatField(null=True, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    def __str__(self):
        return f'{self.name} ({self.get_arm_display()})'

    @property
    def latest_checkpoint(self):
        return self.checkpoints.order_by('-step').first()

    class Meta:
        ordering = ['-created_at']


class Checkpoint(models.Model):
    run = models.ForeignKey(TrainingRun, on_delete=models.CASCADE, related_name='checkpoints')
    step = models.PositiveIntegerField()
    path = models.CharField(max_length=500)
    unet_hash = models.CharField(max_length=64)
    encoder_hash = models.CharField(max_length=64)
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f'{self.run.name} @ step {self.step}'

    class Meta:
        ordering = ['step']
        constraints = [
            models.UniqueConstraint(fields=['run', 'step'], name='unique_checkpoint_step'),
        ]

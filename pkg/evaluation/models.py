from django.db import models


class EvaluationReport(models.Model):
    """Unpaired evaluation of a run's latest checkpoint against a dataset split."""

    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('done', 'Done'),
        ('failed', 'Failed'),
    ]

    run = models.ForeignKey('diffusion.TrainingRun', on_delete=models.CASCADE, related_name='reports')
    checkpoint = models.ForeignKey(
        'diffusion.Checkpoint', null=True, blank=True,
        on_delete=models.SET_NULL, related_name='reports')
    dataset = models.ForeignKey(
        'synthdata.SyntheticDataset', on_delete=models.CASCADE, related_name='reports')
    split = models.CharField(max_length=10, default='test')
    steps = models.PositiveIntegerField(default=50)
    seed = models.PositiveIntegerField(default=0)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')
    error = models.TextField(blank=True)
    payload = models.JSONField(default=dict, blank=True)
    path = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f'{self.run.name} on {self.dataset.name}/{self.split}'

    @property
    def fid(self):
        return self.payload.get('fid')

    class Meta:
        ordering = ['-created_at']

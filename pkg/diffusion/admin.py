from django.contrib import admin

from .models import Checkpoint, TrainingRun


class CheckpointInline(admin.TabularInline):
    model = Checkpoint
    extra = 0
    readonly_fields = ('step', 'path', 'unet_hash', 'encoder_hash', 'created_at')
    can_delete = False


@admin.register(TrainingRun)
class TrainingRunAdmin(admin.ModelAdmin):
    """Admin interface for training runs and their checkpoints."""

    list_display = ('name', 'arm', 'profile', 'status', 'final_ldm', 'checkpoint_count', 'created_at')
    search_fields = ('name', 'run_dir', 'error')
    list_filter = ('arm', 'profile', 'status')
    ordering = ('-created_at',)
    inlines = [CheckpointInline]

    fieldsets = (
        ('Run', {
            'fields': ('name', 'arm', 'profile', 'dataset', 'overrides'),
            'description': 'Training starts automatically after saving.'
        }),
        ('Result', {
            'fields': ('status', 'config', 'run_dir', 'encoder_hash', 'final_ldm', 'error',
                       'created_at', 'finished_at'),
            'classes': ('collapse',),
        }),
    )

    readonly_fields = ('status', 'config', 'run_dir', 'encoder_hash', 'final_ldm', 'error',
                       'created_at', 'finished_at')
    actions = ['retrain']

    def checkpoint_count(self, obj):
        return obj.checkpoints.count()
    checkpoint_count.short_description = 'Checkpoints'

    def retrain(self, request, queryset):
        """Re-run training for selected runs."""
        from .api.tasks import run_training

        count = 0
        for run in queryset:
            run.checkpoints.all().delete()
            run_training.delay(run.id)
            count += 1

        self.message_user(request, f'{count} run(s) queued for training.')
    retrain.short_description = 'Retrain selected runs'


@admin.register(Checkpoint)
class CheckpointAdmin(admin.ModelAdmin):
    list_display = ('run', 'step', 'encoder_hash', 'created_at')
    list_filter = ('run',)
    search_fields = ('path',)

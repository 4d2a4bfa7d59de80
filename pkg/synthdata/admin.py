from django.contrib import admin

from .models import SyntheticDataset


@admin.register(SyntheticDataset)
class SyntheticDatasetAdmin(admin.ModelAdmin):
    """Admin interface for generated pseudo-triplet datasets."""

    list_display = ('name', 'count', 'augment', 'resolution', 'status', 'created_at', 'pairs')
    search_fields = ('name', 'root')
    list_filter = ('status', 'augment', 'resolution')
    ordering = ('-created_at',)

    fieldsets = (
        ('Dataset', {
            'fields': ('name', 'count', 'seed', 'augment', 'two_piece')
        }),
        ('Rendering', {
            'fields': ('resolution', 'codec', 'rho_max'),
            'description': 'Generation starts automatically after saving.'
        }),
        ('Result', {
            'fields': ('status', 'root', 'stats', 'error', 'created_at'),
            'classes': ('collapse',),
        }),
    )

    readonly_fields = ('status', 'stats', 'error', 'created_at')
    actions = ['regenerate']

    def pairs(self, obj):
        """Number of generated pairs."""
        return obj.stats.get('total', {}).get('pairs', 0)

    def regenerate(self, request, queryset):
        """Re-run generation for selected datasets."""
        from .api.tasks import generate_dataset

        count = 0
        for dataset in queryset:
            generate_dataset.delay(dataset.id)
            count += 1

        self.message_user(request, f'{count} dataset(s) queued for generation.')
    regenerate.short_description = 'Regenerate selected datasets'

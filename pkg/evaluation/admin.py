from django.contrib import admin

from .models import EvaluationReport


@admin.register(EvaluationReport)
class EvaluationReportAdmin(admin.ModelAdmin):
    list_display = ('run', 'dataset', 'split', 'status', 'fid_value', 'created_at')
    list_filter = ('status', 'split')
    search_fields = ('run__name', 'dataset__name')
    readonly_fields = ('status', 'payload', 'path', 'error', 'created_at')
    actions = ['reevaluate']

    def fid_value(self, obj):
        return obj.fid
    fid_value.short_description = 'FID'

    def reevaluate(self, request, queryset):
        """Re-run selected evaluations."""
        from .api.tasks import run_evaluation

        count = 0
        for report in queryset:
            run_evaluation.delay(report.id)
            count += 1

        self.message_user(request, f'{count} evaluation(s) queued.')
    reevaluate.short_description = 'Re-run selected evaluations'

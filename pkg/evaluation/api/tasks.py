import logging
from pathlib import Path

from django.conf import settings
from django_rq import job

from ..evaluate import evaluate, write_report
from ..models import EvaluationReport

logger = logging.getLogger(__name__)


@job('default')
def run_evaluation(report_id):
    """Background job that scores the run's latest checkpoint and stores the report payload."""
    try:
        report = EvaluationReport.objects.select_related('run', 'dataset').get(id=report_id)
    except EvaluationReport.DoesNotExist:
        logger.error('EvaluationReport %s does not exist. Task aborted.', report_id)
        return

    checkpoint = report.checkpoint or report.run.latest_checkpoint
    if checkpoint is None or not report.dataset.root:
        _fail(report, 'Run has no checkpoint or dataset has not been generated.')
        return

    report.status = 'running'
    report.checkpoint = checkpoint
    report.save(update_fields=['status', 'checkpoint'])
    try:
        payload = evaluate(checkpoint.path, report.dataset.root, split=report.split,
                           steps=report.steps, seed=report.seed)
    except Exception as exc:
        logger.error('Evaluation %s failed: %s', report_id, exc, exc_info=True)
        _fail(report, str(exc))
        return

    path = Path(settings.TRYON['OUTPUT_ROOT']) / 'reports' / f'report-{report.id:05d}.json'
    report.payload = payload
    report.path = str(write_report(payload, path))
    report.status = 'done'
    report.save(update_fields=['payload', 'path', 'status'])


def _fail(report: EvaluationReport, message: str):
    report.status = 'failed'
    report.error = message
    report.save(update_fields=['status', 'error'])

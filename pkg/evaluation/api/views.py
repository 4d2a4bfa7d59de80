import logging

from django.http import Http404
from rest_framework import status
from rest_framework.permissions import IsAdminUser, IsAuthenticated
from rest_framework.response import Response
from rest_framework.views import APIView

from diffusion.models import TrainingRun

from ..models import EvaluationReport
from .serializers import EvaluationReportSerializer, EvaluationRequestSerializer

logger = logging.getLogger(__name__)


class RunEvaluateView(APIView):
    """Queue an evaluation of a run's latest checkpoint."""

    permission_classes = [IsAdminUser]

    def post(self, request, run_id):
        try:
            run = TrainingRun.objects.get(pk=run_id)
        except TrainingRun.DoesNotExist:
            raise Http404('Training run not found.')

        if run.latest_checkpoint is None:
            return Response({'error': 'Run has no checkpoint yet.'}, status=status.HTTP_409_CONFLICT)

        serializer = EvaluationRequestSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)
        report = EvaluationReport.objects.create(
            run=run, checkpoint=run.latest_checkpoint, **serializer.validated_data)
        return Response(
            {'id': report.id, 'detail': 'Evaluation queued.'},
            status=status.HTTP_202_ACCEPTED,
        )


class ReportDetailView(APIView):
    permission_classes = [IsAuthenticated]

    def get(self, request, report_id):
        try:
            report = EvaluationReport.objects.get(pk=report_id)
        except EvaluationReport.DoesNotExist:
            raise Http404('Report not found.')
        return Response(EvaluationReportSerializer(report).data, status=status.HTTP_200_OK)

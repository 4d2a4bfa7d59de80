import logging

from django.http import Http404
from rest_framework import status
from rest_framework.permissions import IsAdminUser, IsAuthenticated
from rest_framework.response import Response
from rest_framework.views import APIView

from ..models import TrainingRun
from .serializers import TrainingRunCreateSerializer, TrainingRunSerializer

logger = logging.getLogger(__name__)


class TrainingRunListView(APIView):
    """List training runs, or launch one (staff only)."""

    def get_permissions(self):
        if self.request.method == 'POST':
            return [IsAdminUser()]
        return [IsAuthenticated()]

    def get(self, request):
        try:
            runs = TrainingRun.objects.prefetch_related('checkpoints', 'reports')
            serializer = TrainingRunSerializer(runs, many=True)
            return Response(serializer.data, status=status.HTTP_200_OK)
        except Exception as e:
            logger.error(f'Error in TrainingRunListView: {e}', exc_info=True)
            return Response(
                {'error': 'Unable to fetch training runs', 'detail': str(e)},
                status=status.HTTP_500_INTERNAL_SERVER_ERROR,
            )

    def post(self, request):
        serializer = TrainingRunCreateSerializer(data=request.data)
        if serializer.is_valid():
            run = serializer.save()
            return Response(
                {'id': run.id, 'detail': 'Training run created. Training started in background.'},
                status=status.HTTP_201_CREATED,
            )
        return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)


class TrainingRunDetailView(APIView):
    permission_classes = [IsAuthenticated]

    def get(self, request, run_id):
        try:
            run = TrainingRun.objects.get(pk=run_id)
        except TrainingRun.DoesNotExist:
            raise Http404('Training run not found.')
        return Response(TrainingRunSerializer(run).data, status=status.HTTP_200_OK)

import logging
from pathlib import Path

from django.http import FileResponse, Http404
from rest_framework import status
from rest_framework.permissions import IsAdminUser, IsAuthenticated
from rest_framework.response import Response
from rest_framework.views import APIView

from ..dataset import IMAGE_FILES
from ..models import SyntheticDataset
from .serializers import SyntheticDatasetCreateSerializer, SyntheticDatasetSerializer

logger = logging.getLogger(__name__)

SERVABLE_FILES = {f'{name}.png' for name in (*IMAGE_FILES, 'occluder', 'bottom_mask')} | {'aug.json'}


class DatasetListView(APIView):
    """List datasets, or request a new one (staff only)."""

    def get_permissions(self):
        if self.request.method == 'POST':
            return [IsAdminUser()]
        return [IsAuthenticated()]

    def get(self, request):
        try:
            datasets = SyntheticDataset.objects.all()
            serializer = SyntheticDatasetSerializer(datasets, many=True)
            return Response(serializer.data, status=status.HTTP_200_OK)
        except Exception as e:
            logger.error(f'Error in DatasetListView: {e}', exc_info=True)
            return Response(
                {'error': 'Unable to fetch datasets', 'detail': str(e)},
                status=status.HTTP_500_INTERNAL_SERVER_ERROR,
            )

    def post(self, request):
        serializer = SyntheticDatasetCreateSerializer(data=request.data)
        if serializer.is_valid():
            dataset = serializer.save()
            return Response(
                {'id': dataset.id, 'detail': 'Dataset requested. Generation started in background.'},
                status=status.HTTP_201_CREATED,
            )
        return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)


class DatasetSampleFileView(APIView):
    """Serve one file of one generated sample."""

    permission_classes = [IsAuthenticated]

    def get(self, request, dataset_id, sample_id, filename):
        try:
            dataset = SyntheticDataset.objects.get(pk=dataset_id)
        except SyntheticDataset.DoesNotExist:
            raise Http404('Dataset not found.')

        if filename not in SERVABLE_FILES or not sample_id.isdigit() or not dataset.root:
            raise Http404('Sample file not found.')
        path = Path(dataset.root) / sample_id / filename
        if not path.is_file():
            raise Http404('Sample file not found.')

        content_type = 'application/json' if filename.endswith('.json') else 'image/png'
        return FileResponse(open(path, 'rb'), content_type=content_type)

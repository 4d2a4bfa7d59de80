from rest_framework import serializers

from synthdata.dataset import SPLITS
from synthdata.models import SyntheticDataset

from ..models import EvaluationReport


class EvaluationRequestSerializer(serializers.Serializer):
    dataset = serializers.PrimaryKeyRelatedField(queryset=SyntheticDataset.objects.all())
    split = serializers.ChoiceField(choices=SPLITS, default='test')
    steps = serializers.IntegerField(min_value=1, default=50)
    seed = serializers.IntegerField(min_value=0, default=0)


class EvaluationReportSerializer(serializers.ModelSerializer):
    class Meta:
        model = EvaluationReport
        fields = ['id', 'run', 'checkpoint', 'dataset', 'split', 'steps', 'seed', 'status',
                  'error', 'payload', 'created_at']

from rest_framework import serializers

from ..models import SyntheticDataset


class SyntheticDatasetCreateSerializer(serializers.ModelSerializer):
    """Serializer for requesting a new dataset; generation runs in the background."""

    class Meta:
        model = SyntheticDataset
        fields = ['id', 'name', 'count', 'seed', 'augment', 'resolution', 'codec', 'rho_max', 'two_piece']

    def validate_count(self, value):
        if value < 1:
            raise serializers.ValidationError('count must be at least 1.')
        return value

    def validate_rho_max(self, value):
        if not 0.0 <= value <= 1.0:
            raise serializers.ValidationError('rho_max must lie in [0, 1].')
        return value

    def validate(self, attrs):
        from diffusion.codec import CODECS

        codec = attrs.get('codec', 'identity')
        if codec not in CODECS:
            raise serializers.ValidationError({'codec': [f'Unknown codec {codec!r}.']})
        if attrs.get('resolution', 64) % (4 * CODECS[codec].factor):
            raise serializers.ValidationError({'resolution': ['Not divisible by the codec stride.']})
        return attrs


class SyntheticDatasetSerializer(serializers.ModelSerializer):
    kind = serializers.SerializerMethodField()

    class Meta:
        model = SyntheticDataset
        fields = ['id', 'name', 'kind', 'count', 'seed', 'augment', 'resolution', 'codec',
                  'rho_max', 'two_piece', 'status', 'error', 'stats', 'created_at']

    def get_kind(self, obj):
        return 'wild' if obj.augment else 'shop'

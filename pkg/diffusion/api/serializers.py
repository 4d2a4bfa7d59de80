from rest_framework import serializers

from ..codec import CODECS
from ..config import ARMS, DTYPES, PROFILES
from ..models import Checkpoint, TrainingRun
from ..schedule import SCHEDULE_KINDS


class TrainConfigSerializer(serializers.Serializer):
    """Validates a training configuration; unknown keys are rejected, not ignored."""

    profile = serializers.ChoiceField(choices=sorted(PROFILES))
    arm = serializers.ChoiceField(choices=ARMS)
    augment = serializers.BooleanField()
    resolution = serializers.IntegerField(min_value=8)
    codec = serializers.ChoiceField(choices=sorted(CODECS))
    T = serializers.IntegerField(min_value=1)
    schedule_kind = serializers.ChoiceField(choices=SCHEDULE_KINDS)
    beta_start = serializers.FloatField()
    beta_end = serializers.FloatField()
    lr = serializers.FloatField()
    batch_size = serializers.IntegerField(min_value=1)
    steps = serializers.IntegerField(min_value=0)
    lambda_ar = serializers.FloatField(min_value=0.0)
    seed = serializers.IntegerField(min_value=0)
    dataset = serializers.CharField(allow_blank=True)
    output_dir = serializers.CharField(allow_blank=True)
    checkpoint_every = serializers.IntegerField(min_value=1)
    dtype = serializers.ChoiceField(choices=sorted(DTYPES))
    encoder_grid = serializers.IntegerField(min_value=1)
    encoder_token_dim = serializers.IntegerField(min_value=1)
    encoder_width = serializers.IntegerField(min_value=2)
    warmup_steps = serializers.IntegerField(min_value=0)
    warmup_lr = serializers.FloatField()
    unet_base_channels = serializers.IntegerField(min_value=1)
    unet_heads = serializers.IntegerField(min_value=1)
    unet_attention_dim = serializers.IntegerField(min_value=1)
    unet_time_dim = serializers.IntegerField(min_value=2)
    unet_norm_groups = serializers.IntegerField(min_value=1)

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ['Unknown field.'] for key in unknown})
        return super().to_internal_value(data)

    def validate_lr(self, value):
        if value <= 0:
            raise serializers.ValidationError('Learning rate must be positive.')
        return value

    def validate_warmup_lr(self, value):
        if value <= 0:
            raise serializers.ValidationError('Learning rate must be positive.')
        return value

    def validate(self, attrs):
        errors = {}
        if not 0.0 < attrs['beta_start'] <= attrs['beta_end'] < 1.0:
            errors['beta_end'] = ['Betas must satisfy 0 < beta_start <= beta_end < 1.']
        factor = CODECS[attrs['codec']].factor
        if attrs['resolution'] % (4 * factor):
            errors['resolution'] = [f'Must be divisible by {4 * factor} for codec {attrs["codec"]}.']
        if attrs['unet_attention_dim'] % attrs['unet_heads']:
            errors['unet_attention_dim'] = ['Must be divisible by unet_heads.']
        if attrs['unet_base_channels'] % attrs['unet_norm_groups']:
            errors['unet_norm_groups'] = ['Must divide unet_base_channels.']
        if attrs['unet_time_dim'] % 2:
            errors['unet_time_dim'] = ['Must be even.']
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


class CheckpointSerializer(serializers.ModelSerializer):
    class Meta:
        model = Checkpoint
        fields = ['id', 'step', 'path', 'unet_hash', 'encoder_hash', 'created_at']


class TrainingRunCreateSerializer(serializers.ModelSerializer):
    """Serializer for launching a training run; the job starts after commit."""

    class Meta:
        model = TrainingRun
        fields = ['id', 'name', 'arm', 'profile', 'overrides', 'dataset']

    def validate(self, attrs):
        from ..config import ConfigError, load_train_config

        try:
            overrides = {**attrs.get('overrides', {}), 'arm': attrs.get('arm', 'wild_aug+ar')}
            load_train_config(profile=attrs.get('profile', 'desk'), **overrides)
        except ConfigError as exc:
            raise serializers.ValidationError({'overrides': exc.errors})
        except TypeError as exc:
            raise serializers.ValidationError({'overrides': [str(exc)]})
        return attrs


class TrainingRunSerializer(serializers.ModelSerializer):
    checkpoints = CheckpointSerializer(many=True, read_only=True)
    arm_display = serializers.CharField(source='get_arm_display', read_only=True)
    reports = serializers.SerializerMethodField()

    class Meta:
        model = TrainingRun
        fields = ['id', 'name', 'arm', 'arm_display', 'profile', 'status', 'error', 'config',
                  'dataset', 'run_dir', 'encoder_hash', 'final_ldm', 'created_at',
                  'finished_at', 'checkpoints', 'reports']

    def get_reports(self, obj):
        return list(obj.reports.values_list('id', flat=True))

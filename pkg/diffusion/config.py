"""Training configuration: named profiles, JSON config files and ablation-arm constraints."""

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import torch
from django.conf import settings

from .garment_encoder import EncoderConfig
from .schedule import NoiseSchedule, build_schedule
from .unet import UNetConfig

ARMS = ('base', 'wild_aug', 'wild_aug+ar')
DTYPES = {'float32': torch.float32, 'float64': torch.float64}


class ConfigError(ValueError):
    """Invalid training configuration; ``errors`` maps field names to messages."""

    def __init__(self, errors: dict):
        self.errors = errors
        lines = []
        for name, messages in errors.items():
            if not isinstance(messages, (list, tuple)):
                messages = [messages]
            lines.extend(f'{name}: {message}' for message in messages)
        super().__init__('\n'.join(lines))


@dataclass(frozen=True)
class TrainConfig:
    profile: str = 'desk'
    arm: str = 'wild_aug+ar'
    augment: bool = True
    resolution: int = 64
    codec: str = 'identity'
    T: int = 200
    schedule_kind: str = 'linear'
    beta_start: float = 1e-4
    beta_end: float = 2e-2
    lr: float = 1e-4
    batch_size: int = 16
    steps: int = 5000
    lambda_ar: float = 1.0
    seed: int = 0
    dataset: str = ''
    output_dir: str = ''
    checkpoint_every: int = 1000
    dtype: str = 'float32'
    encoder_grid: int = 4
    encoder_token_dim: int = 64
    encoder_width: int = 32
    warmup_steps: int = 500
    warmup_lr: float = 1e-3
    unet_base_channels: int = 32
    unet_heads: int = 2
    unet_attention_dim: int = 64
    unet_time_dim: int = 128
    unet_norm_groups: int = 8

    @property
    def torch_dtype(self):
        return DTYPES[self.dtype]

    @property
    def schedule(self) -> NoiseSchedule:
        return build_schedule(self.T, self.schedule_kind, self.beta_start, self.beta_end)

    @property
    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(resolution=self.resolution, grid=self.encoder_grid,
                             token_dim=self.encoder_token_dim, width=self.encoder_width)

    def unet_config(self, latent_channels: int = 3) -> UNetConfig:
        return UNetConfig(latent_channels=latent_channels,
                          base_channels=self.unet_base_channels,
                          heads=self.unet_heads,
                          attention_dim=self.unet_attention_dim,
                          token_dim=self.encoder_token_dim,
                          time_dim=self.unet_time_dim,
                          norm_groups=self.unet_norm_groups,
                          num_timesteps=self.T)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_arm(self, arm: str, **changes) -> 'TrainConfig':
        return validate_config({**self.to_dict(), **changes, 'arm': arm})


PROFILES = {
    'smoke': {
        'resolution': 16, 'T': 20, 'lr': 1e-3, 'batch_size': 4, 'steps': 30,
        'checkpoint_every': 10, 'encoder_grid': 2, 'encoder_token_dim': 16,
        'encoder_width': 8, 'warmup_steps': 20, 'unet_base_channels': 8,
        'unet_attention_dim': 16, 'unet_time_dim': 16, 'unet_norm_groups': 4,
    },
    'desk': {},
    'full': {
        'T': 1000, 'lr': 5e-6, 'batch_size': 32, 'steps': 12000,
        'checkpoint_every': 2000,
    },
}
# Alias of the long-run profile.
PROFILES['paper'] = PROFILES['full']


def apply_arm_constraints(values: dict) -> dict:
    """base: no augmentation and lambda_ar = 0; wild_aug: lambda_ar = 0; wild_aug+ar keeps lambda_ar."""
    values = dict(values)
    arm = values.get('arm')
    if arm == 'base':
        values['augment'] = False
        values['lambda_ar'] = 0.0
    elif arm == 'wild_aug':
        values['augment'] = True
        values['lambda_ar'] = 0.0
    elif arm == 'wild_aug+ar':
        values['augment'] = True
    return values


def profile_defaults(profile: str) -> dict:
    if profile not in PROFILES:
        raise ConfigError({'profile': [f'Unknown profile {profile!r}; expected one of {sorted(PROFILES)}']})
    defaults = {f.name: f.default for f in fields(TrainConfig)}
    defaults.update(PROFILES[profile])
    defaults['profile'] = profile
    defaults['output_dir'] = str(Path(settings.TRYON['OUTPUT_ROOT']) / 'runs')
    return defaults


def validate_config(values: dict) -> TrainConfig:
    from .api.serializers import TrainConfigSerializer

    serializer = TrainConfigSerializer(data=values)
    if not serializer.is_valid():
        raise ConfigError(serializer.errors)
    return TrainConfig(**apply_arm_constraints(serializer.validated_data))


def load_train_config(path=None, profile: str | None = None, **overrides) -> TrainConfig:
    """Profile defaults, then the JSON file at ``path``, then keyword overrides."""
    file_values = {}
    if path is not None:
        text = Path(path).read_text()
        try:
            file_values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError({'config': [f'line {exc.lineno}: {exc.msg}']}) from exc
        if not isinstance(file_values, dict):
            raise ConfigError({'config': ['Top-level JSON value must be an object.']})
    profile = profile or file_values.get('profile') or settings.TRYON['DEFAULT_PROFILE']
    values = {**profile_defaults(profile), **file_values,
              **{key: value for key, value in overrides.items() if value is not None}}
    values['profile'] = profile
    return validate_config(values)


def config_from_snapshot(snapshot: dict) -> TrainConfig:
    """Rebuild a config from a checkpoint snapshot, re-checking arm constraints."""
    return validate_config(snapshot)

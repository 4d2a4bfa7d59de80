"""Garment encoder producing the clothing token matrix c (l x f) for cross-attention.

The encoder is warmed up once by self-reconstruction and then frozen; try-on
training never updates it.
"""

import hashlib
import logging
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncoderConfig:
    resolution: int = 64
    grid: int = 4
    token_dim: int = 64
    width: int = 32

    @property
    def num_tokens(self) -> int:
        return self.grid * self.grid


class GarmentEncoder(nn.Module):
    """Strided conv stack pooled onto a grid x grid cell layout, one token per cell."""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.config = config
        half = max(config.width // 2, 1)
        self.features = nn.Sequential(
            nn.Conv2d(3, half, 3, stride=2, padding=1),
            nn.SiLU(),
            nn.Conv2d(half, config.width, 3, stride=2, padding=1),
            nn.SiLU(),
            nn.Conv2d(config.width, config.width, 3, padding=1),
            nn.SiLU(),
        )
        self.pool = nn.AdaptiveAvgPool2d(config.grid)
        self.project = nn.Conv2d(config.width, config.token_dim, 1)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        cells = self.project(self.pool(self.features(images)))
        # Row-major raster order over the pooling cells.
        return cells.flatten(2).transpose(1, 2)


class GarmentDecoder(nn.Module):
    """Throw-away decoder used only by the warm-up reconstruction objective."""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.config = config
        self.body = nn.Sequential(
            nn.Conv2d(config.token_dim, config.width, 3, padding=1),
            nn.SiLU(),
            nn.Upsample(size=(config.resolution, config.resolution), mode='bilinear',
                        align_corners=False),
            nn.Conv2d(config.width, config.width, 3, padding=1),
            nn.SiLU(),
            nn.Conv2d(config.width, 3, 3, padding=1),
        )

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        grid = self.config.grid
        cells = tokens.transpose(1, 2).reshape(tokens.shape[0], -1, grid, grid)
        return torch.sigmoid(self.body(cells))


@dataclass
class WarmupResult:
    encoder: GarmentEncoder
    mse_before: float
    mse_after: float
    steps: int


def build_encoder(config: EncoderConfig, seed: int = 0) -> GarmentEncoder:
    """Deterministically initialised encoder for a given seed."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return GarmentEncoder(config)


def freeze(encoder: GarmentEncoder) -> GarmentEncoder:
    encoder.eval()
    encoder.requires_grad_(False)
    return encoder


def parameter_hash(module: nn.Module) -> str:
    """sha256 over every state-dict tensor in key order."""
    digest = hashlib.sha256()
    for key, tensor in sorted(module.state_dict().items()):
        digest.update(key.encode())
        digest.update(str(tensor.dtype).encode())
        digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


def _check_images(images: torch.Tensor, resolution: int) -> torch.Tensor:
    batched = images if images.ndim == 4 else images.unsqueeze(0)
    if batched.ndim != 4 or batched.shape[1] != 3:
        raise ValueError(f'Expected RGB garment images, got shape {tuple(images.shape)}')
    if tuple(batched.shape[-2:]) != (resolution, resolution):
        raise ValueError(
            f'Garment resolution {tuple(batched.shape[-2:])} does not match encoder '
            f'resolution {resolution}x{resolution}')
    return batched


def encode_garment(images: torch.Tensor, encoder: GarmentEncoder) -> torch.Tensor:
    """Token matrix (l x f) for one garment, or (B x l x f) for a batch. Never tracks gradients."""
    batched = _check_images(images, encoder.config.resolution)
    param = next(encoder.parameters())
    with torch.no_grad():
        tokens = encoder(batched.to(dtype=param.dtype, device=param.device))
    return tokens if images.ndim == 4 else tokens[0]


def _reconstruction_mse(encoder, decoder, images) -> float:
    with torch.no_grad():
        return float(F.mse_loss(decoder(encoder(images)), images))


def pretrain_warmup(images: torch.Tensor, steps: int, config: EncoderConfig, seed: int = 0,
                    lr: float = 1e-3, batch_size: int = 8,
                    held_out: torch.Tensor | None = None) -> WarmupResult:
    """Train encoder + decoder by pixel reconstruction, then freeze the encoder and drop the decoder."""

    if images is None or len(images) == 0:
        raise ValueError('Warm-up needs at least one garment image.')
    images = _check_images(images, config.resolution)
    if torch.unique(images.flatten(1), dim=0).shape[0] < 2:
        raise ValueError('Warm-up needs at least two distinct garments.')

    encoder = build_encoder(config, seed).to(images.dtype)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed + 1)
        decoder = GarmentDecoder(config).to(images.dtype)
    reference = images if held_out is None else _check_images(held_out, config.resolution).to(images.dtype)
    mse_before = _reconstruction_mse(encoder, decoder, reference)

    rng = np.random.default_rng(seed)
    optimizer = torch.optim.Adam(list(encoder.parameters()) + list(decoder.parameters()), lr=lr)
    for _ in range(int(steps)):
        idx = torch.from_numpy(rng.integers(0, len(images), size=min(batch_size, len(images))))
        batch = images[idx]
        loss = F.mse_loss(decoder(encoder(batch)), batch)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()

    mse_after = _reconstruction_mse(encoder, decoder, reference)
    logger.info('Garment encoder warm-up: %d steps, reconstruction MSE %.5f -> %.5f',
                steps, mse_before, mse_after)
    return WarmupResult(encoder=freeze(encoder), mse_before=mse_before,
                        mse_after=mse_after, steps=int(steps))

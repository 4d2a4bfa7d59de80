"""Latent codecs: map RGB images (channels-first tensors in [0, 1]) to latents and back."""

import torch
import torch.nn.functional as F


class LatentCodec:
    """Encoder/decoder pair E, D. Subclasses fix the spatial downscale factor."""

    name = 'base'
    factor = 1
    channels = 3

    def __init__(self, resolution: int):
        if resolution % self.factor:
            raise ValueError(f'Resolution {resolution} is not divisible by {self.factor}')
        self.resolution = int(resolution)

    @property
    def latent_resolution(self) -> int:
        return self.resolution // self.factor

    def describe(self) -> dict:
        return {'name': self.name, 'resolution': self.resolution,
                'latent_resolution': self.latent_resolution, 'channels': self.channels}

    def encode(self, img: torch.Tensor) -> torch.Tensor:
        batched = self._as_batch(img, self.resolution, 'image')
        z = self._encode(batched)
        return z if img.ndim == 4 else z[0]

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        batched = self._as_batch(z, self.latent_resolution, 'latent')
        img = self._decode(batched).clamp(0.0, 1.0)
        return img if z.ndim == 4 else img[0]

    def _as_batch(self, x: torch.Tensor, size: int, what: str) -> torch.Tensor:
        if x.ndim not in (3, 4):
            raise ValueError(f'Expected a C x H x W or B x C x H x W {what}, got shape {tuple(x.shape)}')
        batched = x if x.ndim == 4 else x.unsqueeze(0)
        if batched.shape[1] != self.channels:
            raise ValueError(f'Expected {self.channels} channels for {what}, got {batched.shape[1]}')
        if tuple(batched.shape[-2:]) != (size, size):
            raise ValueError(
                f'{what.capitalize()} resolution {tuple(batched.shape[-2:])} does not match '
                f'codec {self.name} at {size}x{size}')
        return batched

    def _encode(self, img: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def _decode(self, z: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError


class IdentityCodec(LatentCodec):
    """Pixel-space diffusion: the latent is the image itself."""

    name = 'identity'

    def _encode(self, img):
        return img

    def _decode(self, z):
        return z


class PoolingCodec(LatentCodec):
    """2x2 area-mean encoder with nearest-neighbour decoder."""

    name = 'pool2'
    factor = 2

    def _encode(self, img):
        return F.avg_pool2d(img, kernel_size=self.factor)

    def _decode(self, z):
        return F.interpolate(z, scale_factor=self.factor, mode='nearest')


CODECS = {codec.name: codec for codec in (IdentityCodec, PoolingCodec)}


def get_codec(name: str, resolution: int) -> LatentCodec:
    try:
        return CODECS[name](resolution)
    except KeyError:
        raise ValueError(f'Unknown codec {name!r}; expected one of {sorted(CODECS)}') from None

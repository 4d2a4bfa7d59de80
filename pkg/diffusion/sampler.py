"""Mask-free inference: reverse diffusion conditioned on {source person, pose map, garment}."""

import logging
import math
from dataclasses import dataclass

import torch

from .codec import LatentCodec
from .garment_encoder import GarmentEncoder, encode_garment
from .schedule import NoiseSchedule, forward_sample, sampling_timesteps
from .unet import ConditioningBundle, TryOnUNet, predict_noise

logger = logging.getLogger(__name__)

SAMPLER_MODES = ('deterministic', 'ancestral')
INIT_MODES = ('noise', 'source')

# Default for per-call guidance: use SamplerConfig.guidance_scale. An explicit None disables guidance.
FROM_CONFIG = object()


def denoise_step(z_t: torch.Tensor, t: int, eps_hat: torch.Tensor, sched: NoiseSchedule,
                 mode: str = 'deterministic', t_prev: int | None = None,
                 noise: torch.Tensor | None = None) -> torch.Tensor:
    """Move z_t to z_{t_prev} (default t - 1) given a noise prediction.

    deterministic: z_prev = sqrt(ab_prev) z0_hat + sqrt(1 - ab_prev) eps_hat.
    ancestral: adds posterior noise sigma * noise, with
    sigma^2 = (1 - ab_prev) / (1 - ab_t) * (1 - ab_t / ab_prev).
    """
    if mode not in SAMPLER_MODES:
        raise ValueError(f'Unknown sampler mode {mode!r}; expected one of {SAMPLER_MODES}')
    sched.check_timestep(t)
    t_prev = t - 1 if t_prev is None else t_prev
    if not 0 <= t_prev < t:
        raise ValueError(f'Previous timestep {t_prev} must lie in [0, {t})')
    if z_t.shape != eps_hat.shape:
        raise ValueError(f'Shape mismatch: z_t {tuple(z_t.shape)} vs eps_hat {tuple(eps_hat.shape)}')

    ab_t = sched.alpha_bar_at(t)
    ab_prev = sched.alpha_bar_at(t_prev)
    z0_hat = (z_t - math.sqrt(1.0 - ab_t) * eps_hat) / math.sqrt(ab_t)

    if mode == 'deterministic':
        return math.sqrt(ab_prev) * z0_hat + math.sqrt(1.0 - ab_prev) * eps_hat

    if noise is None:
        raise ValueError('Ancestral sampling needs injected noise.')
    if noise.shape != z_t.shape:
        raise ValueError(f'Shape mismatch: noise {tuple(noise.shape)} vs z_t {tuple(z_t.shape)}')
    variance = (1.0 - ab_prev) / (1.0 - ab_t) * (1.0 - ab_t / ab_prev)
    direction = math.sqrt(max(1.0 - ab_prev - variance, 0.0))
    return math.sqrt(ab_prev) * z0_hat + direction * eps_hat + math.sqrt(variance) * noise


@dataclass
class SamplerConfig:
    steps: int = 50
    mode: str = 'deterministic'
    init: str = 'noise'
    strength: float = 1.0
    guidance_scale: float | None = None


class TryOnPipeline:
    """Codec, frozen garment encoder, denoiser and schedule wired for inference.

    The pipeline never takes a try-on mask: the model finds the region itself.
    """

    def __init__(self, model: TryOnUNet, encoder: GarmentEncoder, codec: LatentCodec,
                 schedule: NoiseSchedule, config: SamplerConfig | None = None):
        self.model = model.eval()
        self.encoder = encoder.eval()
        self.codec = codec
        self.schedule = schedule
        self.config = config or SamplerConfig()

    @classmethod
    def from_checkpoint(cls, path, config: SamplerConfig | None = None) -> 'TryOnPipeline':
        from .checkpoints import load_checkpoint

        checkpoint = load_checkpoint(path)
        return cls(checkpoint.model, checkpoint.encoder, checkpoint.codec,
                   checkpoint.schedule, config)

    def _dtype(self):
        return next(self.model.parameters()).dtype

    def _prepare(self, image: torch.Tensor) -> torch.Tensor:
        if image.ndim != 3:
            raise ValueError(f'Expected a single C x H x W image, got shape {tuple(image.shape)}')
        return image.to(self._dtype())

    def _eps(self, bundle, t, tokens, guidance_scale):
        eps, _ = predict_noise(bundle, t, tokens, self.model)
        if guidance_scale is None:
            return eps
        uncond, _ = predict_noise(bundle, t, torch.zeros_like(tokens), self.model)
        return uncond + guidance_scale * (eps - uncond)

    @torch.no_grad()
    def try_on(self, person: torch.Tensor, pose: torch.Tensor, garment: torch.Tensor,
               steps: int | None = None, mode: str | None = None, seed: int = 0,
               init: str | None = None, strength: float | None = None,
               guidance_scale: float | None | object = FROM_CONFIG) -> torch.Tensor:
        """Dress ``person`` in ``garment``. Output is an RGB image in [0, 1]."""
        cfg = self.config
        steps = cfg.steps if steps is None else steps
        mode = cfg.mode if mode is None else mode
        init = cfg.init if init is None else init
        strength = cfg.strength if strength is None else strength
        if guidance_scale is FROM_CONFIG:
            guidance_scale = cfg.guidance_scale
        if init not in INIT_MODES:
            raise ValueError(f'Unknown init {init!r}; expected one of {INIT_MODES}')
        if mode not in SAMPLER_MODES:
            raise ValueError(f'Unknown sampler mode {mode!r}; expected one of {SAMPLER_MODES}')

        person, pose, garment = (self._prepare(x) for x in (person, pose, garment))
        source_latent = self.codec.encode(person)
        pose_latent = self.codec.encode(pose)
        tokens = encode_garment(garment, self.encoder).to(self._dtype())

        generator = torch.Generator().manual_seed(int(seed))
        T = self.schedule.T
        timesteps = sampling_timesteps(T, steps)
        if init == 'source':
            if not 0.0 < strength <= 1.0:
                raise ValueError(f'strength must lie in (0, 1], got {strength}')
            start = max(1, int(round(strength * T)))
            timesteps = [t for t in timesteps if t <= start] or [start]
            noise = torch.randn(source_latent.shape, generator=generator, dtype=source_latent.dtype)
            z = forward_sample(source_latent, timesteps[0], noise, self.schedule)
        else:
            z = torch.randn(source_latent.shape, generator=generator, dtype=source_latent.dtype)

        for i, t in enumerate(timesteps):
            t_prev = timesteps[i + 1] if i + 1 < len(timesteps) else 0
            bundle = ConditioningBundle(z, pose_latent, source_latent)
            eps_hat = self._eps(bundle, t, tokens, guidance_scale)
            noise = None
            if mode == 'ancestral':
                noise = torch.randn(z.shape, generator=generator, dtype=z.dtype)
            z = denoise_step(z, t, eps_hat, self.schedule, mode, t_prev=t_prev, noise=noise)

        return self.codec.decode(z)

    def multi_garment(self, person: torch.Tensor, pose: torch.Tensor, garments: list,
                      steps: int | None = None, mode: str | None = None, seed: int = 0,
                      **kwargs) -> torch.Tensor:
        """Apply garments one after another, feeding each result back in as the source person."""
        if not garments:
            raise ValueError('multi_garment needs at least one garment.')
        result = person
        for index, garment in enumerate(garments):
            logger.debug('Composite try-on: garment %d of %d', index + 1, len(garments))
            result = self.try_on(result, pose, garment, steps=steps, mode=mode, seed=seed, **kwargs)
        return result

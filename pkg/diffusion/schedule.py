"""Noise schedule and forward diffusion process."""

from dataclasses import dataclass

import numpy as np
import torch

SCHEDULE_KINDS = ('linear',)


@dataclass(frozen=True)
class NoiseSchedule:
    """Variance schedule beta_t with the derived alpha_t and cumulative alpha_bar_t.

    Index 0 of every array holds step t=1; use the accessors for 1-based t.
    """

    kind: str
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    beta_start: float
    beta_end: float

    @property
    def T(self) -> int:
        return len(self.betas)

    def check_timestep(self, t) -> None:
        """Raise ValueError unless every t lies in [1, T]."""
        values = torch.as_tensor(t)
        if values.numel() == 0:
            raise ValueError('No timestep given.')
        low, high = int(values.min()), int(values.max())
        if low < 1 or high > self.T:
            raise ValueError(f'Timestep out of range [1, {self.T}]: got {low}..{high}')

    def alpha_bar_at(self, t: int) -> float:
        """Return alpha_bar_t with the alpha_bar_0 := 1 convention."""
        if t == 0:
            return 1.0
        self.check_timestep(t)
        return float(self.alpha_bars[t - 1])

    def to_dict(self) -> dict:
        return {
            'kind': self.kind,
            'T': self.T,
            'beta_start': self.beta_start,
            'beta_end': self.beta_end,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'NoiseSchedule':
        return build_schedule(data['T'], data.get('kind', 'linear'),
                              data['beta_start'], data['beta_end'])


def build_schedule(T: int, kind: str = 'linear',
                   beta_start: float = 1e-4, beta_end: float = 2e-2) -> NoiseSchedule:
    """Build a noise schedule; "linear" interpolates beta from beta_start to beta_end."""

    if int(T) != T or T < 1:
        raise ValueError(f'T must be a positive integer, got {T!r}')
    if kind not in SCHEDULE_KINDS:
        raise ValueError(f'Unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}')
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValueError(
            f'Betas must satisfy 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}')

    betas = np.linspace(beta_start, beta_end, int(T), dtype=np.float64)
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    for array in (betas, alphas, alpha_bars):
        array.setflags(write=False)
    return NoiseSchedule(kind=kind, betas=betas, alphas=alphas, alpha_bars=alpha_bars,
                         beta_start=float(beta_start), beta_end=float(beta_end))


def _coefficient(values: np.ndarray, t, like: torch.Tensor) -> torch.Tensor:
    """Gather values[t-1] and shape it for broadcasting against a (B, C, H, W) or (C, H, W) tensor."""
    t_tensor = torch.as_tensor(t, dtype=torch.long)
    gathered = torch.as_tensor(values, dtype=like.dtype, device=like.device)[t_tensor.to(like.device) - 1]
    if gathered.ndim == 0:
        return gathered
    return gathered.reshape(-1, *([1] * (like.ndim - 1)))


def forward_sample(z0: torch.Tensor, t, eps: torch.Tensor, sched: NoiseSchedule) -> torch.Tensor:
    """Draw z_t ~ q(z_t | z_0) as sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps.

    ``t`` is an int or a length-B tensor of ints for batched ``z0``.
    """
    if z0.shape != eps.shape:
        raise ValueError(f'Shape mismatch: z0 {tuple(z0.shape)} vs eps {tuple(eps.shape)}')
    sched.check_timestep(t)
    signal = _coefficient(np.sqrt(sched.alpha_bars), t, z0)
    noise = _coefficient(np.sqrt(1.0 - sched.alpha_bars), t, z0)
    return signal * z0 + noise * eps


def forward_step(z_prev: torch.Tensor, t, eps: torch.Tensor, sched: NoiseSchedule) -> torch.Tensor:
    """One transition of the chain: z_t ~ N(sqrt(alpha_t) z_{t-1}, beta_t I)."""
    if z_prev.shape != eps.shape:
        raise ValueError(f'Shape mismatch: z_prev {tuple(z_prev.shape)} vs eps {tuple(eps.shape)}')
    sched.check_timestep(t)
    keep = _coefficient(np.sqrt(sched.alphas), t, z_prev)
    noise = _coefficient(np.sqrt(sched.betas), t, z_prev)
    return keep * z_prev + noise * eps


def sample_timestep(rng: np.random.Generator, T: int) -> int:
    """Uniform integer in [1, T]."""
    if T < 1:
        raise ValueError(f'T must be >= 1, got {T}')
    return int(rng.integers(1, T + 1))


def sample_timesteps(rng: np.random.Generator, T: int, size: int) -> torch.Tensor:
    if T < 1:
        raise ValueError(f'T must be >= 1, got {T}')
    return torch.from_numpy(rng.integers(1, T + 1, size=size)).long()


def sampling_timesteps(T: int, steps: int) -> list[int]:
    """Strided descending sub-schedule starting at T, ending at 1 when steps > 1."""
    if steps < 1:
        raise ValueError(f'steps must be >= 1, got {steps}')
    steps = min(steps, T)
    grid = np.unique(np.round(np.linspace(T, 1, steps)).astype(int))
    return [int(t) for t in grid[::-1]]

"""Denoising U-Net eps_theta(z_t, zeta, t, c) with recorded garment cross-attention."""

import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F

# Input channel layout [z_t | E(D) | E(P')]; stored in checkpoint manifests.
CHANNEL_LAYOUT = ('z_t', 'pose', 'source')
# Order in which cross-attention blocks appear in an AttentionRecord.
BLOCK_ORDER = ('down.1', 'mid', 'up.1')


@dataclass(frozen=True)
class UNetConfig:
    latent_channels: int = 3
    base_channels: int = 32
    heads: int = 2
    attention_dim: int = 64
    token_dim: int = 64
    time_dim: int = 128
    norm_groups: int = 8
    num_timesteps: int = 200

    def __post_init__(self):
        if self.attention_dim % self.heads:
            raise ValueError(
                f'attention_dim {self.attention_dim} is not divisible by heads {self.heads}')
        if self.base_channels % self.norm_groups:
            raise ValueError(
                f'base_channels {self.base_channels} is not divisible by norm_groups {self.norm_groups}')
        if self.time_dim % 2:
            raise ValueError(f'time_dim must be even, got {self.time_dim}')


@dataclass
class AttentionWeights:
    """Projection matrices W_q (f x d), W_k and W_v (f_c x d) of one attention block."""

    w_q: torch.Tensor
    w_k: torch.Tensor
    w_v: torch.Tensor
    heads: int = 1

    @property
    def dim(self) -> int:
        return self.w_q.shape[1]


@dataclass
class AttentionEntry:
    block_id: str
    resolution: tuple
    scores: torch.Tensor  # (B, h*w, n), head-averaged, rows sum to one


@dataclass
class AttentionRecord:
    entries: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def block_ids(self) -> list:
        return [entry.block_id for entry in self.entries]

    def check(self, tol: float = 1e-6) -> None:
        """Raise ValueError if any recorded map is not row-stochastic with entries in [0, 1]."""
        for entry in self.entries:
            scores = entry.scores.detach()
            h, w = entry.resolution
            if scores.shape[-2] != h * w:
                raise ValueError(f'Block {entry.block_id}: {scores.shape[-2]} rows for {h}x{w}')
            if scores.min() < 0 or scores.max() > 1:
                raise ValueError(f'Block {entry.block_id}: scores outside [0, 1]')
            deviation = (scores.sum(-1) - 1).abs().max()
            if deviation > tol:
                raise ValueError(f'Block {entry.block_id}: row sums deviate by {float(deviation):.3g}')


@dataclass
class ConditioningBundle:
    """Noisy latent with its channel-concatenated conditioning zeta = [E(D), E(P')]."""

    z_t: torch.Tensor
    pose_latent: torch.Tensor
    source_latent: torch.Tensor

    def assemble(self) -> torch.Tensor:
        parts = [self.z_t, self.pose_latent, self.source_latent]
        shapes = {tuple(part.shape) for part in parts}
        if len(shapes) != 1:
            raise ValueError(
                'Conditioning shape mismatch: '
                + ', '.join(f'{name}={tuple(part.shape)}' for name, part in zip(CHANNEL_LAYOUT, parts)))
        batched = [part if part.ndim == 4 else part.unsqueeze(0) for part in parts]
        return torch.cat(batched, dim=1)


def timestep_embedding(t, dim: int, base: float = 10000.0) -> torch.Tensor:
    """Sinusoidal embedding [sin(t w_0..w_{k-1}), cos(t w_0..w_{k-1})] with w_i = base^(-i/k), k = dim/2."""
    if dim % 2:
        raise ValueError(f'Embedding dim must be even, got {dim}')
    steps = torch.as_tensor(t, dtype=torch.float64)
    if (steps < 0).any():
        raise ValueError('Timesteps must be non-negative.')
    half = dim // 2
    freqs = base ** (-torch.arange(half, dtype=torch.float64) / half)
    args = steps.reshape(-1, 1) * freqs
    emb = torch.cat([torch.sin(args), torch.cos(args)], dim=-1)
    return emb if steps.ndim else emb[0]


def cross_attention(p: torch.Tensor, c: torch.Tensor, w: AttentionWeights):
    """A = Softmax(Q K^T / sqrt(d_head)), p_attn = A V with Q = p W_q, K = c W_k, V = c W_v.

    Returns (p_attn, A). With several heads p_attn concatenates the per-head
    outputs and A is the arithmetic mean of the per-head maps.
    """
    if w.w_q.shape[1] != w.w_k.shape[1] or w.w_k.shape[1] != w.w_v.shape[1]:
        raise ValueError('W_q, W_k and W_v must share the attention dimension.')
    if w.dim % w.heads:
        raise ValueError(f'Attention dim {w.dim} not divisible by {w.heads} heads')
    if p.shape[-1] != w.w_q.shape[0]:
        raise ValueError(f'Query rows have {p.shape[-1]} features, W_q expects {w.w_q.shape[0]}')
    if c.shape[-1] != w.w_k.shape[0] or c.shape[-1] != w.w_v.shape[0]:
        raise ValueError(f'Tokens have {c.shape[-1]} features, W_k/W_v expect {w.w_k.shape[0]}')

    unbatched = p.ndim == 2
    if unbatched:
        p, c = p.unsqueeze(0), c.unsqueeze(0)
    batch, rows, _ = p.shape
    head_dim = w.dim // w.heads

    def split(x):
        return x.reshape(batch, x.shape[1], w.heads, head_dim).transpose(1, 2)

    q, k, v = split(p @ w.w_q), split(c @ w.w_k), split(c @ w.w_v)
    scores = torch.softmax(q @ k.transpose(-1, -2) / math.sqrt(head_dim), dim=-1)
    out = (scores @ v).transpose(1, 2).reshape(batch, rows, w.dim)
    scores = scores.mean(dim=1)
    if unbatched:
        return out[0], scores[0]
    return out, scores


class CrossAttention(nn.Module):
    def __init__(self, query_dim: int, context_dim: int, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.w_q = nn.Parameter(torch.randn(query_dim, dim) / math.sqrt(query_dim))
        self.w_k = nn.Parameter(torch.randn(context_dim, dim) / math.sqrt(context_dim))
        self.w_v = nn.Parameter(torch.randn(context_dim, dim) / math.sqrt(context_dim))
        self.to_out = nn.Linear(dim, query_dim)

    @property
    def weights(self) -> AttentionWeights:
        return AttentionWeights(self.w_q, self.w_k, self.w_v, self.heads)

    def forward(self, rows, context):
        out, scores = cross_attention(rows, context, self.weights)
        return self.to_out(out), scores


class ResBlock(nn.Module):
    def __init__(self, in_channels, out_channels, time_dim, groups):
        super().__init__()
        self.norm1 = nn.GroupNorm(groups, in_channels)
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, padding=1)
        self.time = nn.Linear(time_dim, out_channels)
        self.norm2 = nn.GroupNorm(groups, out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1)
        self.skip = (nn.Conv2d(in_channels, out_channels, 1)
                     if in_channels != out_channels else nn.Identity())

    def forward(self, x, temb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.time(temb)[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return self.skip(x) + h


class SelfAttentionBlock(nn.Module):
    """Person-to-person attention; its maps are neither recorded nor regularized."""

    def __init__(self, channels, dim, heads, groups):
        super().__init__()
        self.norm = nn.GroupNorm(groups, channels)
        self.attn = CrossAttention(channels, channels, dim, heads)

    def forward(self, x):
        b, ch, h, w = x.shape
        rows = self.norm(x).flatten(2).transpose(1, 2)
        out, _ = self.attn(rows, rows)
        return x + out.transpose(1, 2).reshape(b, ch, h, w)


class CrossAttentionBlock(nn.Module):
    def __init__(self, block_id, channels, token_dim, dim, heads, groups):
        super().__init__()
        self.block_id = block_id
        self.norm = nn.GroupNorm(groups, channels)
        self.attn = CrossAttention(channels, token_dim, dim, heads)

    def forward(self, x, tokens, record: AttentionRecord):
        b, ch, h, w = x.shape
        rows = self.norm(x).flatten(2).transpose(1, 2)
        out, scores = self.attn(rows, tokens)
        record.entries.append(AttentionEntry(self.block_id, (h, w), scores))
        return x + out.transpose(1, 2).reshape(b, ch, h, w)


class TryOnUNet(nn.Module):
    """Two down / two up stages; garment cross-attention at the two lowest resolutions."""

    def __init__(self, config: UNetConfig):
        super().__init__()
        self.config = config
        c0, c1 = config.base_channels, 2 * config.base_channels
        g, td = config.norm_groups, config.time_dim
        attn = dict(token_dim=config.token_dim, dim=config.attention_dim,
                    heads=config.heads, groups=g)

        self.time_mlp = nn.Sequential(nn.Linear(td, td), nn.SiLU(), nn.Linear(td, td))
        self.conv_in = nn.Conv2d(len(CHANNEL_LAYOUT) * config.latent_channels, c0, 3, padding=1)

        self.down0 = ResBlock(c0, c0, td, g)
        self.downsample0 = nn.Conv2d(c0, c0, 3, stride=2, padding=1)
        self.down1 = ResBlock(c0, c1, td, g)
        self.down1_cross = CrossAttentionBlock('down.1', c1, **attn)
        self.downsample1 = nn.Conv2d(c1, c1, 3, stride=2, padding=1)

        self.mid = ResBlock(c1, c1, td, g)
        self.mid_self = SelfAttentionBlock(c1, config.attention_dim, config.heads, g)
        self.mid_cross = CrossAttentionBlock('mid', c1, **attn)

        self.upsample1 = nn.Conv2d(c1, c1, 3, padding=1)
        self.up1 = ResBlock(2 * c1, c1, td, g)
        self.up1_cross = CrossAttentionBlock('up.1', c1, **attn)
        self.upsample0 = nn.Conv2d(c1, c1, 3, padding=1)
        self.up0 = ResBlock(c1 + c0, c0, td, g)

        self.norm_out = nn.GroupNorm(g, c0)
        self.conv_out = nn.Conv2d(c0, config.latent_channels, 3, padding=1)

    def forward(self, x: torch.Tensor, t: torch.Tensor, tokens: torch.Tensor):
        cfg = self.config
        if x.ndim != 4 or x.shape[1] != len(CHANNEL_LAYOUT) * cfg.latent_channels:
            raise ValueError(
                f'Expected B x {len(CHANNEL_LAYOUT) * cfg.latent_channels} x H x W input, '
                f'got {tuple(x.shape)}')
        if x.shape[-1] % 4 or x.shape[-2] % 4:
            raise ValueError(f'Latent resolution {tuple(x.shape[-2:])} must be divisible by 4')
        if tokens.ndim != 3 or tokens.shape[0] != x.shape[0] or tokens.shape[-1] != cfg.token_dim:
            raise ValueError(
                f'Expected B x n x {cfg.token_dim} garment tokens, got {tuple(tokens.shape)}')
        t = torch.as_tensor(t, dtype=torch.long, device=x.device).reshape(-1).expand(x.shape[0])
        if int(t.min()) < 1 or int(t.max()) > cfg.num_timesteps:
            raise ValueError(f'Timestep out of range [1, {cfg.num_timesteps}]')

        record = AttentionRecord()
        temb = self.time_mlp(timestep_embedding(t.cpu(), cfg.time_dim).to(x))

        h0 = self.down0(self.conv_in(x), temb)
        h1 = self.down1(self.downsample0(h0), temb)
        h1 = self.down1_cross(h1, tokens, record)

        h = self.mid(self.downsample1(h1), temb)
        h = self.mid_self(h)
        h = self.mid_cross(h, tokens, record)

        h = self.upsample1(F.interpolate(h, scale_factor=2, mode='nearest'))
        h = self.up1(torch.cat([h, h1], dim=1), temb)
        h = self.up1_cross(h, tokens, record)
        h = self.upsample0(F.interpolate(h, scale_factor=2, mode='nearest'))
        h = self.up0(torch.cat([h, h0], dim=1), temb)

        return self.conv_out(F.silu(self.norm_out(h))), record


def build_unet(config: UNetConfig, seed: int = 0, dtype=torch.float32) -> TryOnUNet:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return TryOnUNet(config).to(dtype)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def predict_noise(bundle: ConditioningBundle, t, tokens: torch.Tensor, model: TryOnUNet):
    """eps_hat and the per-block attention record for one (possibly batched) conditioning bundle."""
    x = bundle.assemble()
    unbatched = bundle.z_t.ndim == 3
    if tokens.ndim == 2:
        tokens = tokens.unsqueeze(0).expand(x.shape[0], -1, -1)
    eps_hat, record = model(x, t, tokens)
    return (eps_hat[0] if unbatched else eps_hat), record

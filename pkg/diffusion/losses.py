"""L_LDM, the try-on localization loss L_ar and their weighted sum."""

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .unet import AttentionRecord


@dataclass
class LossBreakdown:
    ldm: object
    ar: object
    total: object
    lambda_ar: float

    def as_record(self) -> dict:
        return {
            'ldm': float(self.ldm),
            'ar': float(self.ar),
            'total': float(self.total),
            'lambda_ar': float(self.lambda_ar),
        }


def ldm_loss(eps: torch.Tensor, eps_hat: torch.Tensor) -> torch.Tensor:
    """Mean squared error over all elements."""
    if eps.shape != eps_hat.shape:
        raise ValueError(f'Shape mismatch: eps {tuple(eps.shape)} vs eps_hat {tuple(eps_hat.shape)}')
    return F.mse_loss(eps_hat, eps, reduction='mean')


def resize_mask(mask: torch.Tensor, h: int, w: int) -> torch.Tensor:
    """Area-pool an (H, W) or (B, H, W) binary mask to (h, w), keeping cells with try-on share > 0.5."""
    if mask.ndim not in (2, 3):
        raise ValueError(f'Expected an H x W or B x H x W mask, got shape {tuple(mask.shape)}')
    H, W = mask.shape[-2:]
    if h < 1 or w < 1 or h > H or w > W or H % h or W % w:
        raise ValueError(f'Cannot resize a {H}x{W} mask to {h}x{w}: scale factors must be integers')
    batched = mask if mask.ndim == 3 else mask.unsqueeze(0)
    pooled = F.avg_pool2d(batched.unsqueeze(1).to(torch.float64), kernel_size=(H // h, W // w))
    resized = (pooled[:, 0] > 0.5).to(mask.dtype if mask.is_floating_point() else torch.float32)
    return resized if mask.ndim == 3 else resized[0]


def _outside_mass_per_block(rec: AttentionRecord, mask: torch.Tensor) -> list:
    if len(rec) == 0:
        raise ValueError('Attention record is empty.')
    values = []
    for entry in rec:
        h, w = entry.resolution
        scores = entry.scores if entry.scores.ndim == 3 else entry.scores.unsqueeze(0)
        resized = resize_mask(mask, h, w).to(scores)
        outside = 1.0 - resized.reshape(-1, h * w, 1)
        # (1/n) sum_k mean_pixels(A_k * (1 - M)), then mean over the batch.
        values.append((scores * outside).mean(dim=(1, 2)).mean())
    return values


def localization_loss(rec: AttentionRecord, mask: torch.Tensor) -> torch.Tensor:
    """Mean attention mass that garment tokens place on the non-try-on area, averaged over blocks."""
    return torch.stack(_outside_mass_per_block(rec, mask)).mean()


def attention_outside_mass(rec: AttentionRecord, mask: torch.Tensor) -> dict:
    """Per-block values of the localization loss, for reports."""
    return {entry.block_id: float(value)
            for entry, value in zip(rec, _outside_mass_per_block(rec, mask))}


def total_loss(ldm, ar, lambda_ar: float) -> LossBreakdown:
    """L = L_LDM + lambda_ar * L_ar."""
    if lambda_ar < 0:
        raise ValueError(f'lambda_ar must be >= 0, got {lambda_ar}')
    for name, value in (('ldm', ldm), ('ar', ar)):
        if not torch.isfinite(torch.as_tensor(value)).all():
            raise ValueError(f'{name} loss is not finite: {value}')
    return LossBreakdown(ldm=ldm, ar=ar, total=ldm + lambda_ar * ar, lambda_ar=lambda_ar)

"""FID, KID and region-preservation metrics over features of a frozen random extractor.

The extractor stands in for Inception: absolute values are only comparable
between reports that share an extractor id.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import torch
import torch.nn as nn
import torch.nn.functional as F

FID_JITTER = 1e-6
KID_SCALE = 100.0
KID_BOOTSTRAP = 100


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray      # m x q
    extractor_id: str

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError(f'Features must be an m x q matrix, got shape {self.values.shape}')
        if not np.isfinite(self.values).all():
            raise ValueError('Features contain non-finite values')

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def q(self) -> int:
        return self.values.shape[1]


class RandomConvFeatureExtractor(nn.Module):
    """Fixed-seed random conv stack; features are global-average-pooled activations of every stage."""

    def __init__(self, resolution: int, widths=(16, 32, 64), seed: int = 0):
        super().__init__()
        self.resolution = resolution
        self.seed = seed
        self.widths = tuple(widths)
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            stages = []
            in_channels = 3
            for width in self.widths:
                stages.append(nn.Conv2d(in_channels, width, 3, stride=2, padding=1))
                in_channels = width
            self.stages = nn.ModuleList(stages)
        self.to(torch.float64).eval().requires_grad_(False)

    @property
    def extractor_id(self) -> str:
        return f'randconv-r{self.resolution}-w{"-".join(map(str, self.widths))}-s{self.seed}'

    @property
    def dim(self) -> int:
        return sum(self.widths)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        h = images * 2.0 - 1.0
        pooled = []
        for stage in self.stages:
            h = F.leaky_relu(stage(h), 0.2)
            pooled.append(h.mean(dim=(2, 3)))
        return torch.cat(pooled, dim=1)


def extract_features(images, extractor: RandomConvFeatureExtractor, batch_size: int = 64) -> FeatureMatrix:
    """``images``: B x 3 x H x W tensor or a list of C x H x W tensors, values in [0, 1]."""
    if isinstance(images, (list, tuple)):
        if not images:
            raise ValueError('No images to extract features from')
        images = torch.stack(list(images))
    if images.ndim != 4 or images.shape[0] == 0:
        raise ValueError(f'Expected a non-empty B x 3 x H x W batch, got {tuple(images.shape)}')
    if tuple(images.shape[-2:]) != (extractor.resolution, extractor.resolution):
        raise ValueError(f'Image resolution {tuple(images.shape[-2:])} does not match extractor '
                         f'resolution {extractor.resolution}')
    chunks = []
    with torch.no_grad():
        for start in range(0, images.shape[0], batch_size):
            chunks.append(extractor(images[start:start + batch_size].to(torch.float64)))
    return FeatureMatrix(values=torch.cat(chunks).numpy(), extractor_id=extractor.extractor_id)


def _as_array(x) -> np.ndarray:
    return x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)


def _check_pair(x: np.ndarray, y: np.ndarray):
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ValueError(f'Need at least two samples per set, got {x.shape[0]} and {y.shape[0]}')
    if x.shape[1] != y.shape[1]:
        raise ValueError(f'Feature dims differ: {x.shape[1]} vs {y.shape[1]}')


def _symmetric_sqrt(mat: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = scipy.linalg.eigh(mat)
    return (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T


def trace_sqrt_product(sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    """Tr((S1 S2)^1/2) as Tr((A S2 A)^1/2) with A = S1^1/2, which keeps everything symmetric."""
    root = _symmetric_sqrt(sigma1)
    inner = root @ sigma2 @ root
    inner = (inner + inner.T) / 2.0
    return float(np.sqrt(np.clip(scipy.linalg.eigvalsh(inner), 0.0, None)).sum())


def fid_from_statistics(mu1, sigma1, mu2, sigma2, jitter: float = FID_JITTER) -> float:
    mu1, mu2 = np.atleast_1d(mu1).astype(np.float64), np.atleast_1d(mu2).astype(np.float64)
    sigma1 = np.atleast_2d(sigma1).astype(np.float64)
    sigma2 = np.atleast_2d(sigma2).astype(np.float64)
    if mu1.shape != mu2.shape or sigma1.shape != sigma2.shape:
        raise ValueError('Statistics have mismatched shapes')
    offset = jitter * np.eye(sigma1.shape[0])
    sigma1, sigma2 = sigma1 + offset, sigma2 + offset
    diff = mu1 - mu2
    value = diff @ diff + np.trace(sigma1) + np.trace(sigma2) - 2.0 * trace_sqrt_product(sigma1, sigma2)
    return float(value)


def fid(x, y) -> float:
    """Frechet distance between Gaussian fits of two feature sets (covariance with 1/(m-1))."""
    x, y = _as_array(x), _as_array(y)
    _check_pair(x, y)
    return fid_from_statistics(x.mean(axis=0), np.cov(x, rowvar=False),
                               y.mean(axis=0), np.cov(y, rowvar=False))


def polynomial_kernel(a: np.ndarray, b: np.ndarray, degree: int = 3, coef0: float = 1.0) -> np.ndarray:
    return (a @ b.T / a.shape[1] + coef0) ** degree


def _block_sizes(m: int, n_blocks: int) -> np.ndarray:
    base = m // n_blocks
    sizes = np.full(n_blocks, base)
    sizes[n_blocks - (m - base * n_blocks):] += 1
    return np.concatenate([[0], np.cumsum(sizes)])


def _unbiased_mmd2(r: np.ndarray, g: np.ndarray, degree: int) -> float:
    m, n = len(r), len(g)
    k_rr = polynomial_kernel(r, r, degree)
    k_gg = polynomial_kernel(g, g, degree)
    k_rg = polynomial_kernel(r, g, degree)
    return ((k_rr.sum() - np.trace(k_rr)) / (m * (m - 1))
            + (k_gg.sum() - np.trace(k_gg)) / (n * (n - 1))
            - 2.0 * k_rg.mean())


def kid_blocks(x, y, degree: int = 3, max_block_size: int = 1024) -> np.ndarray:
    """Unbiased MMD^2 per block; blocks split both sets into near-equal parts of at most ``max_block_size``."""
    x, y = _as_array(x), _as_array(y)
    _check_pair(x, y)
    n_blocks = int(np.ceil(max(x.shape[0], y.shape[0]) / max_block_size))
    if min(x.shape[0], y.shape[0]) < 2 * n_blocks:
        raise ValueError('Each KID block needs at least two samples per set')
    idx_x, idx_y = _block_sizes(x.shape[0], n_blocks), _block_sizes(y.shape[0], n_blocks)
    return np.array([_unbiased_mmd2(x[idx_x[i]:idx_x[i + 1]], y[idx_y[i]:idx_y[i + 1]], degree)
                     for i in range(n_blocks)])


def kid(x, y, degree: int = 3, max_block_size: int = 1024) -> float:
    """Unbiased squared MMD with k(x, y) = (x.y / q + 1)^degree; unscaled, may be negative."""
    return float(kid_blocks(x, y, degree, max_block_size).mean())


def kid_bootstrap(x, y, degree: int = 3, n_bootstrap: int = KID_BOOTSTRAP, seed: int = 0) -> np.ndarray:
    """KID of ``n_bootstrap`` seeded resamples, drawn with replacement from each set."""
    x, y = _as_array(x), _as_array(y)
    _check_pair(x, y)
    if n_bootstrap < 2:
        raise ValueError(f'n_bootstrap must be >= 2, got {n_bootstrap}')
    rng = np.random.default_rng(seed)
    estimates = []
    for _ in range(n_bootstrap):
        r = x[rng.integers(0, len(x), size=len(x))]
        g = y[rng.integers(0, len(y), size=len(y))]
        estimates.append(_unbiased_mmd2(r, g, degree))
    return np.array(estimates)


def kid_with_error(x, y, degree: int = 3, max_block_size: int = 1024,
                   n_bootstrap: int = KID_BOOTSTRAP, seed: int = 0) -> tuple:
    """(KID, standard error).

    With several blocks SE = sqrt(var(blocks) / n_blocks). A single block falls
    back to the spread of ``n_bootstrap`` seeded resamples.
    """
    estimates = kid_blocks(x, y, degree, max_block_size)
    if len(estimates) >= 2:
        return float(estimates.mean()), float(np.sqrt(estimates.var(ddof=1) / len(estimates)))
    resampled = kid_bootstrap(x, y, degree, n_bootstrap, seed)
    return float(estimates.mean()), float(resampled.std(ddof=1))


def region_mae(a: np.ndarray, b: np.ndarray, mask: np.ndarray, inside: bool = True) -> float:
    """Mean absolute error over pixels inside M (or its complement); images are H x W x C."""
    a, b, mask = np.asarray(a, np.float64), np.asarray(b, np.float64), np.asarray(mask)
    if a.shape != b.shape or a.shape[:2] != mask.shape:
        raise ValueError(f'Shapes differ: {a.shape}, {b.shape}, mask {mask.shape}')
    region = mask > 0 if inside else mask <= 0
    if not region.any():
        raise ValueError('Region is empty')
    return float(np.abs(a - b)[region].mean())

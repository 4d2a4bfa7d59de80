import numpy as np
import torch

from synthdata.api.utils import load_png, save_png


def load_image_tensor(path, dtype=torch.float32) -> torch.Tensor:
    """PNG on disk (H x W x 3) to a C x H x W tensor in [0, 1]."""
    return torch.from_numpy(load_png(path)).permute(2, 0, 1).contiguous().to(dtype)


def tensor_to_image(image: torch.Tensor) -> np.ndarray:
    return image.detach().cpu().to(torch.float64).permute(1, 2, 0).numpy()


def save_image_tensor(image: torch.Tensor, path) -> None:
    save_png(tensor_to_image(image), path)

"""Teachers produce P' from {P, D, M, C'}: the person re-dressed in another garment."""

import logging
import shlex
import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings

from .api.utils import load_png, run_command, save_png
from .figures import Garment, render_texture

logger = logging.getLogger(__name__)


class TryOnTeacher:
    """Mask-based try-on model used to manufacture pseudo-triplets."""

    name = 'abstract'

    def try_on(self, person: np.ndarray, pose: np.ndarray, mask: np.ndarray,
               garment: Garment) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def check_inputs(person, pose, mask):
        if person.ndim != 3 or person.shape[2] != 3:
            raise ValueError(f'Person must be H x W x 3, got {person.shape}')
        if pose.shape != person.shape:
            raise ValueError(f'Pose map shape {pose.shape} does not match person {person.shape}')
        if mask.shape != person.shape[:2]:
            raise ValueError(f'Mask shape {mask.shape} does not match person {person.shape[:2]}')
        if not np.isin(mask, (0.0, 1.0)).all():
            raise ValueError('Try-on mask must be binary')


class SyntheticTeacher(TryOnTeacher):
    """Exact compositor: pixels inside M take the new garment texture, everything else is copied."""

    name = 'synthetic'

    def try_on(self, person, pose, mask, garment):
        self.check_inputs(person, pose, mask)
        if pose[mask > 0].size and not pose[mask > 0].any():
            raise ValueError('Try-on mask covers no body part of the pose map')
        texture = render_texture(garment.texture, person.shape[0])
        return np.where(mask[..., None] > 0, texture, person)


class CommandTeacher(TryOnTeacher):
    """Adapter for an external mask-based try-on tool.

    The command receives ``--person --pose --mask --garment --output`` PNG paths.
    """

    name = 'command'

    def __init__(self, command: str):
        if not (command or '').strip():
            raise ValueError('CommandTeacher needs a command (--teacher-command or TRYON_TEACHER_COMMAND)')
        self.command = shlex.split(command)

    def try_on(self, person, pose, mask, garment):
        self.check_inputs(person, pose, mask)
        with tempfile.TemporaryDirectory(prefix='tryon-teacher-') as tmp:
            tmp = Path(tmp)
            paths = {name: tmp / f'{name}.png' for name in ('person', 'pose', 'mask', 'garment', 'output')}
            save_png(person, paths['person'])
            save_png(pose, paths['pose'])
            save_png(mask, paths['mask'])
            save_png(garment.image, paths['garment'])
            args = [*self.command]
            for name, path in paths.items():
                args += [f'--{name}', str(path)]
            run_command(args)
            result = load_png(paths['output'])
        if result.shape != person.shape:
            raise ValueError(f'Teacher returned shape {result.shape}, expected {person.shape}')
        logger.debug('External teacher produced %s', result.shape)
        return result


def get_teacher(name: str = 'synthetic', command: str | None = None) -> TryOnTeacher:
    """``command`` overrides TRYON['TEACHER_COMMAND'] for the external teacher."""
    if name == 'synthetic':
        return SyntheticTeacher()
    if name == 'command':
        return CommandTeacher(command or settings.TRYON.get('TEACHER_COMMAND', ''))
    raise ValueError(f'Unknown teacher {name!r}')

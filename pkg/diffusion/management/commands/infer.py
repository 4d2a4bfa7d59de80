from django.core.management.base import BaseCommand, CommandError

from diffusion.api.utils import load_image_tensor, save_image_tensor
from diffusion.checkpoints import CheckpointError, CheckpointNotFound
from diffusion.sampler import INIT_MODES, SAMPLER_MODES, SamplerConfig, TryOnPipeline


def add_sampling_arguments(parser):
    parser.add_argument('--checkpoint', required=True, help='Checkpoint or run directory')
    parser.add_argument('--person', required=True)
    parser.add_argument('--pose', required=True)
    parser.add_argument('--out', required=True)
    parser.add_argument('--steps', type=int, default=50)
    parser.add_argument('--mode', choices=SAMPLER_MODES, default='deterministic')
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--init', choices=INIT_MODES, default='noise')
    parser.add_argument('--strength', type=float, default=1.0)
    parser.add_argument('--guidance-scale', type=float)


def load_pipeline(options) -> TryOnPipeline:
    config = SamplerConfig(steps=options['steps'], mode=options['mode'], init=options['init'],
                           strength=options['strength'], guidance_scale=options['guidance_scale'])
    try:
        return TryOnPipeline.from_checkpoint(options['checkpoint'], config)
    except (CheckpointError, CheckpointNotFound) as exc:
        raise CommandError(str(exc)) from exc


class Command(BaseCommand):
    help = 'Dress a person in a garment with a trained checkpoint. No mask is taken.'

    def add_arguments(self, parser):
        add_sampling_arguments(parser)
        parser.add_argument('--garment', required=True)

    def handle(self, *args, **options):
        pipeline = load_pipeline(options)
        try:
            images = [load_image_tensor(options[name]) for name in ('person', 'pose', 'garment')]
            result = pipeline.try_on(*images, seed=options['seed'])
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        save_image_tensor(result, options['out'])
        self.stdout.write(self.style.SUCCESS(f"Wrote {options['out']}"))

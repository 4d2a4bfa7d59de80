from django.core.management.base import BaseCommand, CommandError

from diffusion.config import ARMS, PROFILES, ConfigError, load_train_config
from diffusion.training import FrozenEncoderViolation, NonFiniteLossError, train
from synthdata.dataset import ManifestError


class Command(BaseCommand):
    help = 'Train the mask-free try-on U-Net for one ablation arm.'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON training config; keys override the profile')
        parser.add_argument('--profile', choices=sorted(PROFILES))
        parser.add_argument('--arm', choices=ARMS)
        parser.add_argument('--dataset')
        parser.add_argument('--steps', type=int)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--lambda-ar', type=float)
        parser.add_argument('--output-dir')
        parser.add_argument('--run-name')
        parser.add_argument('--device')

    def handle(self, *args, **options):
        overrides = {key: options[key] for key in
                     ('arm', 'dataset', 'steps', 'seed', 'lambda_ar', 'output_dir')}
        try:
            config = load_train_config(options['config'], profile=options['profile'], **overrides)
        except ConfigError as exc:
            raise CommandError(f'Invalid training config:\n{exc}') from exc
        except OSError as exc:
            raise CommandError(f'Cannot read config: {exc}') from exc

        try:
            result = train(config, run_name=options['run_name'], progress=options['verbosity'] > 0,
                           device=options['device'])
        except NonFiniteLossError as exc:
            raise CommandError(f'{exc} (batch ids {exc.batch_ids})') from exc
        except (ValueError, ManifestError, FrozenEncoderViolation) as exc:
            raise CommandError(str(exc)) from exc

        self.stdout.write(self.style.SUCCESS(
            f'Trained {config.arm} for {result.steps} steps; '
            f'{len(result.checkpoints)} checkpoint(s) in {result.run_dir}'))

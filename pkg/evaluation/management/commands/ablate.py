from django.core.management.base import BaseCommand, CommandError

from diffusion.config import PROFILES, ConfigError
from synthdata.augment import PlacementFailure

from evaluation.ablation import ablation_table, run_ablation


class Command(BaseCommand):
    help = 'Train and evaluate the Base, +WildAug and +WildAug+L_ar arms and emit a comparison table.'

    def add_arguments(self, parser):
        parser.add_argument('--profile', choices=sorted(PROFILES), default='desk')
        parser.add_argument('--config', help='JSON training config shared by all arms')
        parser.add_argument('--out', required=True)
        parser.add_argument('--count', type=int, default=200)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--steps', type=int)
        parser.add_argument('--eval-steps', type=int, default=50)
        parser.add_argument('--device')

    def handle(self, *args, **options):
        try:
            summary = run_ablation(
                options['out'], profile=options['profile'], count=options['count'],
                seed=options['seed'], steps=options['steps'], eval_steps=options['eval_steps'],
                config_path=options['config'], progress=options['verbosity'] > 0,
                device=options['device'])
        except ConfigError as exc:
            raise CommandError(f'Invalid training config:\n{exc}') from exc
        except (ValueError, OSError, PlacementFailure) as exc:
            raise CommandError(str(exc)) from exc

        self.stdout.write(ablation_table(summary['arms']))
        self.stdout.write(self.style.SUCCESS(f"Ablation written to {options['out']}"))

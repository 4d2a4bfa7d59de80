from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from synthdata.augment import PlacementFailure
from synthdata.dataset import build_dataset, dataset_stats


class Command(BaseCommand):
    help = 'Generate a synthetic pseudo-triplet dataset (person, garment, re-dressed person, pose, mask).'

    def add_arguments(self, parser):
        parser.add_argument('--count', type=int, required=True)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', required=True, help='Dataset root directory')
        parser.add_argument('--resolution', type=int, default=64)
        parser.add_argument('--codec', default='identity')
        parser.add_argument('--rho-max', type=float, default=0.4)
        parser.add_argument('--teacher', default='synthetic', choices=['synthetic', 'command'])
        parser.add_argument('--teacher-command',
                            help='External teacher command line; defaults to TRYON_TEACHER_COMMAND')
        parser.add_argument('--workers', type=int, default=1)
        parser.add_argument('--two-piece', action='store_true')
        augment = parser.add_mutually_exclusive_group()
        augment.add_argument('--augment', dest='augment', action='store_true', default=True,
                             help='In-the-wild augmentation (default)')
        augment.add_argument('--no-augment', dest='augment', action='store_false',
                             help='Clean in-shop style samples')

    def handle(self, *args, **options):
        teacher_command = options['teacher_command'] or settings.TRYON.get('TEACHER_COMMAND', '')
        if options['teacher'] == 'command' and not teacher_command.strip():
            raise CommandError('--teacher command needs --teacher-command or TRYON_TEACHER_COMMAND')

        try:
            manifest = build_dataset(
                count=options['count'], seed=options['seed'], augment=options['augment'],
                out_dir=options['out'], resolution=options['resolution'], codec=options['codec'],
                rho_max=options['rho_max'], teacher=options['teacher'], workers=options['workers'],
                progress=options['verbosity'] > 0, two_piece=options['two_piece'],
                teacher_command=teacher_command or None,
            )
        except (ValueError, OSError, PlacementFailure) as exc:
            raise CommandError(str(exc)) from exc

        stats = dataset_stats(options['out'])['total']
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {len(manifest['samples'])} samples to {options['out']} "
            f"({len(manifest['skipped'])} skipped, {stats['wild_foregrounds']} with occluders)"))

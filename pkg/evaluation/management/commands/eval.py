from django.core.management.base import BaseCommand, CommandError

from diffusion.checkpoints import CheckpointError, CheckpointNotFound
from synthdata.dataset import SPLITS, ManifestError

from evaluation.evaluate import evaluate_wild_and_shop, write_report


class Command(BaseCommand):
    help = 'Unpaired evaluation of a checkpoint: FID, KID, region MAE and attention-outside-mask mass.'

    def add_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True, help='Checkpoint or run directory')
        parser.add_argument('--dataset', required=True, help='Augmented (wild) dataset root')
        parser.add_argument('--shop-dataset', help='Clean dataset root, evaluated as well when given')
        parser.add_argument('--split', choices=SPLITS, default='test')
        parser.add_argument('--steps', type=int, default=50)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', help='Write the JSON report here')

    def handle(self, *args, **options):
        try:
            reports = evaluate_wild_and_shop(
                options['checkpoint'], options['dataset'], options['shop_dataset'],
                split=options['split'], steps=options['steps'], seed=options['seed'],
                progress=options['verbosity'] > 0)
        except (CheckpointError, CheckpointNotFound, ManifestError, ValueError) as exc:
            raise CommandError(str(exc)) from exc

        if options['out']:
            write_report(reports, options['out'])
        for name, report in reports.items():
            self.stdout.write(
                f"{name}: FID {report['fid']:.4f}  KID x100 {report['kid']['value']:.4f}  "
                f"MAE out/in {report['mae_outside']:.4f}/{report['mae_inside']:.4f}  "
                f"attention outside {report['attention_outside']['mean']:.4f}")
        self.stdout.write(self.style.SUCCESS('Evaluation complete.'))

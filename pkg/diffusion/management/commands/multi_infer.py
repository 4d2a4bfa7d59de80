from django.core.management.base import BaseCommand, CommandError

from diffusion.api.utils import load_image_tensor, save_image_tensor

from .infer import add_sampling_arguments, load_pipeline


class Command(BaseCommand):
    help = 'Apply several garments in order, each result becoming the next source person.'

    def add_arguments(self, parser):
        add_sampling_arguments(parser)
        parser.add_argument('--garment', action='append', required=True,
                            help='Repeat for each garment, in application order')

    def handle(self, *args, **options):
        pipeline = load_pipeline(options)
        try:
            person = load_image_tensor(options['person'])
            pose = load_image_tensor(options['pose'])
            garments = [load_image_tensor(path) for path in options['garment']]
            result = pipeline.multi_garment(person, pose, garments, seed=options['seed'])
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        save_image_tensor(result, options['out'])
        self.stdout.write(self.style.SUCCESS(
            f"Applied {len(garments)} garment(s); wrote {options['out']}"))

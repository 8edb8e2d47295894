from ...runs import generate
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Generate a channel dataset for an experiment config'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--output', help='Dataset file (default: the dataset cache)')
        parser.add_argument('--jobs', type=int, default=1)

    def run(self, **options):
        experiment = self.load_experiment(options)
        path = generate(experiment, output=options['output'], jobs=options['jobs'])
        self.success(f"Wrote {experiment.num_samples} channel samples to {path}")

from ...plots import plot_results
from ...sweeps import AXES
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Render a results CSV as a vector figure'
    requires_config = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--input', required=True, help='Results CSV')
        parser.add_argument('--output', help='Figure path, .svg/.pdf/.eps (default: next to the CSV, .svg)')
        parser.add_argument('--axis', choices=AXES, help='Quantity on the x axis (default: guessed from the values)')

    def run(self, **options):
        path = plot_results(options['input'], output=options['output'], axis=options['axis'])
        self.success(f"Figure written to {path}")

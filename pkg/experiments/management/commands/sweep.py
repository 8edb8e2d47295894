from core.config import config_hash
from ...runs import record_results, write_results
from ...sweeps import AXES, FEEDBACK_AXIS, METHODS, SweepSpec, run_sweep
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Sweep mean test SE over transmit power or feedback bits'
    training_arguments = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--axis', required=True, choices=AXES)
        parser.add_argument('--values', nargs='+', type=float, required=True)
        parser.add_argument('--methods', nargs='+', choices=METHODS, default=list(METHODS))
        parser.add_argument('--dataset', help='Dataset file (default: the dataset cache)')
        parser.add_argument('--jobs', type=int, default=1, help='Sweep points run in parallel')
        parser.add_argument('--n-paths', type=int, default=8, help='OMP sparsity for mo_omp')
        parser.add_argument('--mo-iters', type=int, default=200)
        parser.add_argument('--output', help='Results CSV (default: <results>/sweep-<axis>-<config hash>.csv)')

    def run(self, **options):
        experiment = self.load_experiment(options)
        axis = options['axis']
        values = tuple(int(value) if axis == FEEDBACK_AXIS and value.is_integer() else value
                       for value in options['values'])
        spec = SweepSpec(axis=axis, values=values, methods=tuple(options['methods']),
                         n_paths=options['n_paths'], mo_iters=options['mo_iters'])

        name = f"sweep-{axis}-{config_hash(experiment.system)[:12]}.csv"
        path = self.results_path(options['output'], name)
        table = run_sweep(experiment, spec, options['dataset'], path.with_suffix(''), jobs=options['jobs'])
        write_results(table, path)
        record_results(table, axis, csv_path=path)
        self.success(f"Wrote {len(table)} result row(s) to {path}")

from core.config import config_hash
from trainer.evaluation import LEARNED_METHODS
from ...runs import evaluate_run, record_results, run_for_checkpoint, write_results
from ...sweeps import METHODS, POWER_AXIS
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Evaluate methods on the test split and write a results CSV'
    training_arguments = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--dataset', help='Dataset file (default: the dataset cache)')
        parser.add_argument('--checkpoint', help='Trained pipeline for the learned methods')
        parser.add_argument('--methods', nargs='+', choices=METHODS)
        parser.add_argument('--powers-dbm', nargs='+', type=float, help='Transmit powers (default: the config rho)')
        parser.add_argument('--n-paths', type=int, default=8, help='OMP sparsity for mo_omp')
        parser.add_argument('--mo-iters', type=int, default=200)
        parser.add_argument('--output', help='Results CSV (default: <results>/eval-<config hash>.csv)')

    def run(self, **options):
        experiment = self.load_experiment(options)
        methods = options['methods'] or [experiment.training.architecture]
        table = evaluate_run(experiment, methods, dataset=options['dataset'], checkpoint=options['checkpoint'],
                             powers_dbm=options['powers_dbm'], n_paths=options['n_paths'],
                             mo_iters=options['mo_iters'])
        name = f"eval-{config_hash(experiment.system)[:12]}.csv"
        path = write_results(table, self.results_path(options['output'], name))
        run = run_for_checkpoint(options['checkpoint']) if any(m in LEARNED_METHODS for m in methods) else None
        record_results(table, POWER_AXIS, csv_path=path, run=run)
        self.success(f"Wrote {len(table)} result row(s) to {path}")

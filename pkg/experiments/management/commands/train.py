from ...runs import train_run
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Train the end-to-end pipeline; writes a checkpoint and a history CSV'
    training_arguments = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--dataset', help='Dataset file (default: the dataset cache)')
        parser.add_argument('--output', help='Run directory (default: <results>/<run id>)')
        parser.add_argument('--resume', metavar='CHECKPOINT', help='Continue training from this checkpoint')
        parser.add_argument('--progress', action='store_true')

    def run(self, **options):
        experiment = self.load_experiment(options)
        run = train_run(experiment, dataset=options['dataset'], output_dir=options['output'],
                        resume=options['resume'], progress=options['progress'])
        best = 'n/a' if run.best_val_se is None else f"{run.best_val_se:.4f}"
        self.success(f"Run {run.run_id}: {run.epochs} epochs, best validation SE {best}, "
                     f"checkpoint {run.checkpoint_path}")

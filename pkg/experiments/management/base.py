import dataclasses
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from core.config import SystemConfig
from trainer.pipeline import ARCHITECTURES
from ..cli import HANDLED_ERRORS, as_command_error
from ..config import load_experiment_config
from ..sweeps import feedback_config


class ExperimentCommand(BaseCommand):
    """
    Base for the experiment subcommands: reads `--config`, applies the
    `--<field>` overrides of every SystemConfig field, and turns domain
    failures into a CommandError carrying the matching exit code.
    """
    requires_config = True
    training_arguments = False

    def add_arguments(self, parser):
        if self.requires_config:
            parser.add_argument('--config', required=True, help='Experiment config file (JSON)')
            overrides = parser.add_argument_group('system overrides')
            for field in dataclasses.fields(SystemConfig):
                overrides.add_argument(f'--{field.name}', type=field.type, default=None, metavar=field.name.upper())
        else:
            parser.add_argument('--config', help='Experiment config file; accepted for a uniform command line, not read')
        if self.training_arguments:
            training = parser.add_argument_group('training overrides')
            training.add_argument('--epochs', type=int)
            training.add_argument('--batch-size', type=int)
            training.add_argument('--lr', type=float)
            training.add_argument('--architecture', choices=sorted(ARCHITECTURES))
            training.add_argument('--feedback-bits', type=int,
                                  help='Set B, D and V from the feedback presets for this bit budget')
            training.add_argument('--freeze-codebook', action='store_true', default=None)

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except HANDLED_ERRORS as e:
            raise as_command_error(e) from e

    def run(self, **options):
        raise NotImplementedError

    def load_experiment(self, options):
        experiment = load_experiment_config(options['config'], options)
        if not self.training_arguments:
            return experiment

        if options.get('feedback_bits') is not None:
            experiment = experiment.replace_system(feedback_config(experiment.system, options['feedback_bits']))
        changes = {name: options.get(name) for name in ('epochs', 'batch_size', 'lr', 'architecture', 'freeze_codebook')}
        changes = {name: value for name, value in changes.items() if value is not None}
        if changes:
            experiment = dataclasses.replace(experiment, training=experiment.training.replace(**changes))
        return experiment

    def results_path(self, output, name):
        return Path(output) if output else Path(settings.RESULTS_DIR) / name

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))

"""
Subcommand dispatch and exit codes.

    python manage.py hbf gen-data --config configs/desk.json
    python manage.py hbf train --config configs/desk.json --epochs 200
    python manage.py hbf eval --config configs/desk.json --checkpoint results/<run>/checkpoint.pt
    python manage.py hbf sweep --config configs/desk.json --axis feedback_bits --values 32 64 128
    python manage.py hbf plot --input results/sweep.csv

Every failure ends with one `error: ...` line on stderr and an exit code
naming its class.
"""
import sys

from django.core.exceptions import ValidationError as DjangoValidationError
from django.core.management import CommandError, call_command
from rest_framework import serializers

from baselines.omp import SensingMatrixError
from beamformer.normalization import DegenerateBeamformerError
from channel.storage import DatasetFormatError
from feedback.quantizer import CorruptFeedbackError
from objective.rates import SingularCovarianceError
from trainer.checkpoints import CheckpointMismatchError
from trainer.evaluation import EmptySplitError
from trainer.training import TrainingDivergedError
from .config import ConfigFileError
from .plots import EmptyResultsError
from .sweeps import SweepSpecError

EXIT_OK = 0
EXIT_GENERIC = 1
EXIT_BAD_CONFIG = 2
EXIT_MISSING_FILE = 3
EXIT_CONSTRAINT = 4

SUBCOMMANDS = {
    'gen-data': 'gen_data',
    'train': 'train',
    'eval': 'evaluate',
    'sweep': 'sweep',
    'plot': 'plot',
}

BAD_CONFIG_ERRORS = (serializers.ValidationError, DjangoValidationError, ConfigFileError, SweepSpecError)
CONSTRAINT_ERRORS = (
    AssertionError,
    CheckpointMismatchError,
    CorruptFeedbackError,
    DatasetFormatError,
    DegenerateBeamformerError,
    EmptyResultsError,
    EmptySplitError,
    SensingMatrixError,
    SingularCovarianceError,
    TrainingDivergedError,
)
# Failures a command turns into a CommandError; anything else keeps its traceback.
HANDLED_ERRORS = BAD_CONFIG_ERRORS + CONSTRAINT_ERRORS + (OSError, KeyError, ValueError, RuntimeError)


def exit_code_for(exc):
    if isinstance(exc, FileNotFoundError):
        return EXIT_MISSING_FILE
    if isinstance(exc, BAD_CONFIG_ERRORS):
        return EXIT_BAD_CONFIG
    if isinstance(exc, CONSTRAINT_ERRORS):
        return EXIT_CONSTRAINT
    return EXIT_GENERIC


def _flatten(detail, prefix=''):
    if isinstance(detail, dict):
        for key, value in detail.items():
            yield from _flatten(value, f"{prefix}{key}: " if key != 'non_field_errors' else prefix)
    elif isinstance(detail, (list, tuple)):
        for value in detail:
            yield from _flatten(value, prefix)
    else:
        yield f"{prefix}{detail}"


def describe(exc):
    """Single-line diagnostic for a failure."""
    if isinstance(exc, serializers.ValidationError):
        text = '; '.join(_flatten(exc.detail))
    elif isinstance(exc, DjangoValidationError):
        text = '; '.join(exc.messages)
    elif isinstance(exc, FileNotFoundError) and exc.filename:
        text = f"No such file: {exc.filename}"
    else:
        text = str(exc) or type(exc).__name__
    return ' '.join(text.split())


def as_command_error(exc):
    return CommandError(describe(exc), returncode=exit_code_for(exc))


def run_subcommand(argv, stdout=None, stderr=None):
    """Run one subcommand (`gen-data`, `train`, `eval`, `sweep`, `plot`) and return its exit code."""
    stderr = stderr or sys.stderr
    if not argv or argv[0] not in SUBCOMMANDS:
        got = repr(argv[0]) if argv else 'nothing'
        stderr.write(f"error: expected a subcommand ({', '.join(SUBCOMMANDS)}), got {got}\n")
        return EXIT_GENERIC
    try:
        call_command(SUBCOMMANDS[argv[0]], *argv[1:], stdout=stdout or sys.stdout)
    except CommandError as e:
        message = ' '.join(str(e).split()).removeprefix('Error: ')
        stderr.write(f"error: {message}\n")
        return e.returncode
    return EXIT_OK

"""
Dataset generation, training runs and evaluation behind the `gen-data`,
`train` and `eval` subcommands.
"""
import hashlib
import json
import logging
import math
from dataclasses import asdict
from pathlib import Path

import pandas as pd
import torch
from django.conf import settings

from channel.generators import generate_dataset
from channel.storage import load_dataset, save_dataset
from core.config import config_hash
from core.units import dbm_to_mw, mw_to_dbm
from trainer.checkpoints import CheckpointMismatchError, load_checkpoint, save_checkpoint
from trainer.evaluation import LEARNED_METHODS, RESULT_COLUMNS, evaluate, evaluate_baseline
from trainer.state import build_state
from trainer.training import HISTORY_COLUMNS, TrainingDivergedError, split_dataset, train
from .models import SweepResult, TrainingRun

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = 'checkpoint.pt'
HISTORY_NAME = 'history.csv'


def dataset_key(experiment):
    payload = json.dumps({
        'system': experiment.system.to_dict(),
        'channel': asdict(experiment.channel),
        'num_samples': experiment.num_samples,
    }, sort_keys=True)
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]


def default_dataset_path(experiment):
    return Path(settings.DATASET_CACHE_DIR) / f"{dataset_key(experiment)}.hbfc"


def generate(experiment, output=None, jobs=1):
    path = Path(output) if output else default_dataset_path(experiment)
    H = generate_dataset(experiment.system, experiment.channel, experiment.num_samples, jobs=jobs)
    save_dataset(path, H)
    logger.info("Wrote %d channel samples to %s", len(H), path)
    return path


def load_channels(experiment, path=None):
    path = Path(path) if path else default_dataset_path(experiment)
    if not path.exists():
        raise FileNotFoundError(f"Dataset {path} not found (run gen-data first)")
    return torch.from_numpy(load_dataset(path, experiment.system))


def held_out(experiment, H):
    return split_dataset(H, experiment.system.seed).test


def train_run(experiment, dataset=None, output_dir=None, resume=None, progress=False):
    """
    Train one pipeline and record it as a TrainingRun. With `resume`, the
    checkpoint at that path is continued in place.
    """
    config = experiment.system
    H = load_channels(experiment, dataset)

    state = None
    if resume:
        state = load_checkpoint(resume, config)
        if state.options.architecture != experiment.training.architecture:
            raise CheckpointMismatchError(
                f"{resume} holds a {state.options.architecture} pipeline, not {experiment.training.architecture}")
        output_dir = Path(resume).parent

    run = TrainingRun.objects.create(
        architecture=experiment.training.architecture,
        config=config.to_dict(),
        config_hash=config_hash(config),
        feedback_bits=config.B,
    )
    output_dir = Path(output_dir) if output_dir else Path(settings.RESULTS_DIR) / str(run.run_id)
    checkpoint_path = Path(resume) if resume else output_dir / CHECKPOINT_NAME
    history_path = output_dir / HISTORY_NAME
    run.checkpoint_path = str(checkpoint_path)
    run.history_path = str(history_path)
    run.save()

    try:
        state, history = train(config, H, options=experiment.training, state=state,
                               checkpoint_path=checkpoint_path, progress=progress)
    except TrainingDivergedError:
        run.status = TrainingRun.StatusChoices.DIVERGED
        run.save()
        raise

    save_checkpoint(checkpoint_path, state)
    pd.DataFrame(history, columns=HISTORY_COLUMNS).to_csv(history_path, index=False)

    run.status = TrainingRun.StatusChoices.COMPLETED
    run.epochs = state.epoch
    run.best_val_se = state.best_val_se if math.isfinite(state.best_val_se) else None
    run.save()
    logger.info("Run %s finished after %d epochs", run.run_id, state.epoch)
    return run


def evaluate_run(experiment, methods, dataset=None, checkpoint=None, powers_dbm=None, n_paths=8, mo_iters=200):
    """
    Test-split table for `methods` at each transmit power. Learned methods use
    the best snapshot of `checkpoint`, or a fresh initialisation without one.
    MO+OMP senses with the pilots of that same pipeline.
    """
    config = experiment.system
    test = held_out(experiment, load_channels(experiment, dataset))
    powers_dbm = list(powers_dbm) if powers_dbm else [mw_to_dbm(config.rho)]
    rhos = [dbm_to_mw(value) for value in powers_dbm]

    trained = None
    if checkpoint:
        trained = load_checkpoint(checkpoint, config)
        trained.restore_best()

    tables = []
    for method in methods:
        if method in LEARNED_METHODS:
            state = trained
            if state is None:
                logger.warning("No checkpoint given; evaluating an untrained %s pipeline", method)
                state = build_state(config, experiment.training.replace(architecture=method))
            elif state.options.architecture != method:
                raise CheckpointMismatchError(
                    f"{checkpoint} holds a {state.options.architecture} pipeline, not {method}")
            tables.append(evaluate(state, test, rhos, axis_values=powers_dbm, method=method))
        else:
            pilot = None
            if method == 'mo_omp':
                pilot = trained.pipeline.pilot if trained is not None else untrained_pilot(experiment)
            tables.append(evaluate_baseline(method, test, config, rhos, axis_values=powers_dbm, pilot=pilot,
                                            n_paths=n_paths, mo_iters=mo_iters))
    return pd.concat(tables, ignore_index=True)[RESULT_COLUMNS]


def untrained_pilot(experiment):
    logger.warning("No checkpoint given; MO+OMP senses with untrained pilots")
    return build_state(experiment.system, experiment.training).pipeline.pilot


def write_results(table, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, columns=RESULT_COLUMNS)
    return path


def record_results(table, axis, csv_path='', run=None):
    """Index a results table in the database."""
    rows = [
        SweepResult(run=run, axis=axis, axis_value=row.axis_value, method=row.method, mean_se=row.mean_se,
                    stderr=row.stderr, n=row.n, csv_path=str(csv_path))
        for row in table.itertuples(index=False)
    ]
    return SweepResult.objects.bulk_create(rows)


def run_for_checkpoint(checkpoint):
    if not checkpoint:
        return None
    return TrainingRun.objects.filter(checkpoint_path=str(Path(checkpoint))).first()

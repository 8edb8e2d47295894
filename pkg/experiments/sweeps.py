"""
Sweeps of mean test SE against transmit power or feedback overhead.

A power sweep trains each learned method once and evaluates that model at
every power. A feedback sweep trains one model per bit budget. Baselines
with perfect CSI ignore the budget, so they are evaluated once and repeated
for each value; MO+OMP senses with the pilots trained at each budget.
"""
import logging
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path

import pandas as pd
from django.core.exceptions import ValidationError

from core.units import dbm_to_mw
from core.validators import validate
from feedback.presets import configure_feedback
from trainer.checkpoints import load_checkpoint, save_checkpoint
from trainer.evaluation import BASELINE_METHODS, LEARNED_METHODS, RESULT_COLUMNS, evaluate, evaluate_baseline
from trainer.training import train
from .config import ExperimentConfig
from .runs import default_dataset_path, held_out, load_channels

logger = logging.getLogger(__name__)

POWER_AXIS = 'transmit_power_dbm'
FEEDBACK_AXIS = 'feedback_bits'
AXES = (POWER_AXIS, FEEDBACK_AXIS)
METHODS = LEARNED_METHODS + BASELINE_METHODS


class SweepSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    methods: tuple
    n_paths: int = 8
    mo_iters: int = 200

    def validate(self, config):
        if self.axis not in AXES:
            raise SweepSpecError(f"Unknown sweep axis {self.axis!r}; choose from {', '.join(AXES)}")
        if not self.values:
            raise SweepSpecError("A sweep needs at least one value")
        if not self.methods:
            raise SweepSpecError("A sweep needs at least one method")
        unknown = [method for method in self.methods if method not in METHODS]
        if unknown:
            raise SweepSpecError(f"Unknown method(s) {', '.join(unknown)}")
        if 'mo_omp' in self.methods and sensing_method(self.methods) is None:
            raise SweepSpecError("mo_omp senses with trained pilots; sweep it together with gnn or mlp")
        if self.axis == FEEDBACK_AXIS:
            for bits in self.values:
                feedback_config(config, bits)
        return self


def feedback_config(config, bits):
    """Config with B, D and V for a bit budget, refused when the budget has no integral codeword length."""
    if int(bits) != bits:
        raise SweepSpecError(f"Feedback budget {bits} is not a whole number of bits")
    try:
        return validate(configure_feedback(config, int(bits)))
    except (KeyError, ValueError, ValidationError) as e:
        message = e.messages[0] if isinstance(e, ValidationError) else str(e).strip("'\"")
        raise SweepSpecError(f"B={int(bits)}: {message}")


def sensing_method(methods):
    """The learned method whose trained pilots MO+OMP senses with."""
    return next((method for method in methods if method in LEARNED_METHODS), None)


@dataclass(frozen=True)
class SweepPoint:
    """One independent unit of work: a method trained (if learned) once and evaluated at some powers."""
    method: str
    config: object
    training: object
    rhos: tuple
    axis_values: tuple
    dataset: str
    checkpoint: str = None
    pilot_checkpoint: str = None
    n_paths: int = 8
    mo_iters: int = 200


def sweep_points(experiment, spec, dataset, output_dir):
    config = experiment.system
    output_dir = Path(output_dir)
    sensing = sensing_method(spec.methods)
    points = []
    for method in spec.methods:
        common = dict(method=method, training=experiment.training.replace(architecture=method),
                      dataset=str(dataset), n_paths=spec.n_paths, mo_iters=spec.mo_iters)
        if spec.axis == POWER_AXIS:
            points.append(SweepPoint(
                config=config,
                rhos=tuple(dbm_to_mw(value) for value in spec.values),
                axis_values=tuple(spec.values),
                checkpoint=str(output_dir / f"{method}.pt") if method in LEARNED_METHODS else None,
                pilot_checkpoint=str(output_dir / f"{sensing}.pt") if method == 'mo_omp' else None,
                **common,
            ))
        elif method in LEARNED_METHODS or method == 'mo_omp':
            # MO+OMP follows the pilots trained at each budget.
            for bits in spec.values:
                learned = method in LEARNED_METHODS
                points.append(SweepPoint(
                    config=feedback_config(config, bits),
                    rhos=(config.rho,),
                    axis_values=(bits,),
                    checkpoint=str(output_dir / f"{method}-B{int(bits)}.pt") if learned else None,
                    pilot_checkpoint=None if learned else str(output_dir / f"{sensing}-B{int(bits)}.pt"),
                    **common,
                ))
        else:
            points.append(SweepPoint(config=config, rhos=(config.rho,) * len(spec.values),
                                     axis_values=tuple(spec.values), **common))
    return points


def sensing_pilots(point):
    if point.pilot_checkpoint is None:
        return None
    state = load_checkpoint(point.pilot_checkpoint, point.config)
    state.restore_best()
    return state.pipeline.pilot


def run_point(point):
    """Evaluate one sweep point; runs in a worker process when the sweep is parallel."""
    experiment = ExperimentConfig(system=point.config, training=point.training)
    H = load_channels(experiment, point.dataset)
    test = held_out(experiment, H)
    if point.method in LEARNED_METHODS:
        state, _ = train(point.config, H, options=point.training, checkpoint_path=point.checkpoint)
        save_checkpoint(point.checkpoint, state)
        state.restore_best()
        table = evaluate(state, test, point.rhos, axis_values=point.axis_values, method=point.method)
    else:
        table = evaluate_baseline(point.method, test, point.config, point.rhos, axis_values=point.axis_values,
                                  pilot=sensing_pilots(point), n_paths=point.n_paths, mo_iters=point.mo_iters)
    logger.info("Sweep point %s at %s done", point.method, ', '.join(f"{v:g}" for v in point.axis_values))
    return table


def _run_points(points, jobs):
    if not points:
        return []
    if jobs > 1:
        with Pool(jobs) as pool:
            return pool.map(run_point, points)
    return [run_point(point) for point in points]


def run_sweep(experiment, spec, dataset, output_dir, jobs=1):
    """
    Results table (RESULT_COLUMNS) over every method and axis value, in method
    order. Learned points run first so MO+OMP can sense with their pilots.
    """
    spec.validate(experiment.system)
    dataset = dataset or default_dataset_path(experiment)
    points = sweep_points(experiment, spec, dataset, output_dir)
    logger.info("Sweeping %s over %d value(s): %d point(s), jobs=%d",
                spec.axis, len(spec.values), len(points), jobs)
    learned = [i for i, point in enumerate(points) if point.method in LEARNED_METHODS]
    baselines = [i for i, point in enumerate(points) if point.method not in LEARNED_METHODS]
    tables = {}
    for indices in (learned, baselines):
        tables.update(zip(indices, _run_points([points[i] for i in indices], jobs)))
    return pd.concat([tables[i] for i in range(len(points))], ignore_index=True)[RESULT_COLUMNS]

"""
Deterministic evaluation: every test sample gets pilot noise from its own
seed, so numbers do not depend on batch size or on the order of methods.
"""
import logging
import math

import numpy as np
import pandas as pd
import torch

from baselines.digital import fully_digital_svd
from baselines.manifold import mo_hybrid
from baselines.omp import DEFAULT_NUM_PATHS, AngleDictionary, omp_channel_estimate
from core.seeding import STREAM_EVAL, derive_seed
from objective.rates import spectral_efficiency
from pilot.network import seeded_pilot_noise, transmit_pilots

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['method', 'axis_value', 'mean_se', 'stderr', 'n']
LEARNED_METHODS = ('gnn', 'mlp')
BASELINE_METHODS = ('mo_pcsi', 'mo_omp', 'fully_digital')


class EmptySplitError(ValueError):
    pass


def eval_noise_seeds(config, count):
    return [derive_seed(config.seed, STREAM_EVAL, index) for index in range(count)]


def summarize(values):
    """(mean, standard error) of per-sample values; stderr is 0 for a single sample."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptySplitError("Cannot summarise an empty split")
    stderr = values.std(ddof=1) / math.sqrt(values.size) if values.size > 1 else 0.0
    return float(values.mean()), float(stderr)


@torch.no_grad()
def per_sample_rates(pipeline, H, rho, batch_size=256):
    """Mean SE of every sample of H under the pipeline at transmit power rho (mW)."""
    if len(H) == 0:
        raise EmptySplitError("Evaluation split is empty")
    config = pipeline.config
    was_training = pipeline.training
    pipeline.eval()
    seeds = eval_noise_seeds(config, len(H))
    rates = []
    for start in range(0, len(H), batch_size):
        batch = H[start:start + batch_size]
        noise = seeded_pilot_noise(seeds[start:start + batch_size], config)
        rates.append(pipeline(batch, noise=noise, rho=rho).per_sample_rate)
    pipeline.train(was_training)
    return torch.cat(rates).numpy()


def _row(method, axis_value, values):
    mean, stderr = summarize(values)
    return {'method': method, 'axis_value': axis_value, 'mean_se': mean, 'stderr': stderr, 'n': len(values)}


def evaluate(state, H_test, rhos, axis_values=None, method=None):
    """
    Table (pandas DataFrame with RESULT_COLUMNS) of mean SE per transmit power
    for a trained or freshly initialised state. `axis_values` labels the rows
    (dBm values for a power sweep); it defaults to the powers themselves.
    """
    pipeline = state.pipeline if hasattr(state, 'pipeline') else state
    method = method or pipeline.architecture
    axis_values = list(rhos) if axis_values is None else list(axis_values)
    rows = [_row(method, label, per_sample_rates(pipeline, H_test, rho)) for rho, label in zip(rhos, axis_values)]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def evaluate_baseline(method, H_test, config, rhos, axis_values=None, pilot=None, n_paths=DEFAULT_NUM_PATHS,
                      mo_iters=200, mo_tol=1e-6):
    """
    Same table for one of BASELINE_METHODS; MO designs are computed once per
    sample and reused across powers. mo_omp senses through `pilot`, the pilot
    stage of the learned pipeline it is compared with.
    """
    if method not in BASELINE_METHODS:
        raise ValueError(f"Unknown baseline {method!r}")
    if len(H_test) == 0:
        raise EmptySplitError("Evaluation split is empty")
    H_test = H_test.to(torch.complex128)
    axis_values = list(rhos) if axis_values is None else list(axis_values)
    rates = np.zeros((len(rhos), len(H_test)))

    if method == 'fully_digital':
        for r, rho in enumerate(rhos):
            rates[r] = fully_digital_svd(H_test, rho, config.sigma_n2, config).mean.numpy()
    else:
        if method == 'mo_omp':
            if pilot is None:
                raise ValueError("mo_omp needs the PilotNetwork of the learned pipeline it is compared with")
            dictionary = AngleDictionary.for_config(config)
            noise = seeded_pilot_noise(eval_noise_seeds(config, len(H_test)), config)
            with torch.no_grad():
                received = transmit_pilots(H_test, pilot, config, noise=noise).Y
        for i, H in enumerate(H_test):
            target = H
            if method == 'mo_omp':
                target = omp_channel_estimate(received[i], pilot, dictionary, n_paths, config)
            design = mo_hybrid(target, config, iters=mo_iters, tol=mo_tol)
            for r, rho in enumerate(rhos):
                rates[r, i] = spectral_efficiency(H, design.beamformer, design.combiner, rho,
                                                  config.sigma_n2, config).mean.item()
    logger.info("Evaluated %s on %d samples at %d power(s)", method, len(H_test), len(rhos))
    return pd.DataFrame([_row(method, label, rates[r]) for r, label in enumerate(axis_values)],
                        columns=RESULT_COLUMNS)

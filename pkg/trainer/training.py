"""
Joint training of pilots, codebook and the two beamforming networks.

Every epoch draws its shuffling and pilot noise from a generator derived
from (seed, epoch), so a resumed run follows the same trajectory as an
uninterrupted one.
"""
import copy
import logging
from dataclasses import dataclass

import numpy as np
import torch
from tqdm import tqdm

from core.seeding import STREAM_INIT, STREAM_SPLIT, STREAM_TRAIN, numpy_generator, torch_generator
from feedback.quantizer import split
from .checkpoints import save_checkpoint
from .evaluation import per_sample_rates, summarize
from .state import TrainingOptions, build_state

logger = logging.getLogger(__name__)

TRAIN_FRACTION = 0.6
VALIDATION_FRACTION = 0.2
HISTORY_COLUMNS = ['epoch', 'train_loss', 'train_vq_loss', 'train_rate', 'val_se']


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class DatasetSplits:
    train: torch.Tensor
    validation: torch.Tensor
    test: torch.Tensor


def split_dataset(H, seed):
    """Disjoint 60/20/20 train/validation/test split from a seeded permutation."""
    H = torch.as_tensor(H)
    n = len(H)
    order = torch.from_numpy(numpy_generator(seed, STREAM_SPLIT).permutation(n))
    n_train = int(TRAIN_FRACTION * n)
    n_validation = int(VALIDATION_FRACTION * n)
    return DatasetSplits(
        train=H[order[:n_train]],
        validation=H[order[n_train:n_train + n_validation]],
        test=H[order[n_train + n_validation:]],
    )


def _check_constraints(state, output):
    config = state.config
    power = (state.pipeline.pilot.s.abs() ** 2).sum(dim=-1)
    if bool((power > config.NRFt * (1 + 1e-9)).any()):
        raise AssertionError("Pilot power constraint violated")
    output.beamformer.check_constraints(config)
    output.combiner.check_constraints(config)


@torch.no_grad()
def init_codebook(state, H_train):
    """Seed the codewords with noise-normalised pilot segments of one batch of training channels."""
    config = state.config
    generator = torch_generator(config.seed, STREAM_INIT, 6)
    picks = torch.randperm(len(H_train), generator=generator)[:state.options.batch_size]
    Y = state.pipeline.received(H_train[picks], generator=generator).Y
    state.pipeline.codebook.init_from_segments(split(Y, config.V), generator)


def train_epoch(state, H_train):
    """One pass over the training split; returns sample-weighted (loss, vq_loss, rate)."""
    config, options, pipeline = state.config, state.options, state.pipeline
    generator = torch_generator(config.seed, STREAM_TRAIN, state.epoch)
    order = torch.randperm(len(H_train), generator=generator)
    pipeline.train()
    totals = np.zeros(3)
    last_segments = None
    for start in range(0, len(H_train), options.batch_size):
        batch = H_train[order[start:start + options.batch_size]]
        output = pipeline(batch, generator=generator)
        if not torch.isfinite(output.loss):
            raise TrainingDivergedError(f"Non-finite loss at epoch {state.epoch + 1}")
        state.optimizer.zero_grad()
        output.loss.backward()
        state.optimizer.step()
        pipeline.pilot.project_()
        if options.check_constraints:
            _check_constraints(state, output)
        totals += len(batch) * np.array([output.loss.item(), output.vq_loss.item(), output.rate.item()])
        last_segments = output.segments
    if not options.freeze_codebook and last_segments is not None:
        pipeline.codebook.reseed_dead_codewords(last_segments, generator)
    return totals / len(H_train)


def train(config, dataset, epochs=None, batch_size=None, lr=None, options=None, state=None,
          checkpoint_path=None, progress=False):
    """
    Train on the 60% split of `dataset` (channels (N, K, Nr, Nt)) and
    return (state, history). A restored `state` is resumed until it has
    `epochs` completed epochs.
    """
    options = options or (state.options if state is not None else TrainingOptions())
    overrides = {key: value for key, value in (('epochs', epochs), ('batch_size', batch_size), ('lr', lr))
                 if value is not None}
    options = options.replace(**overrides)
    if state is None:
        state = build_state(config, options)
    state.options = options

    splits = split_dataset(dataset, config.seed)
    if len(splits.train) == 0 or len(splits.validation) == 0:
        raise ValueError(f"Dataset of {len(dataset)} samples is too small to split")
    H_train = splits.train.to(torch.complex128)
    H_validation = splits.validation.to(torch.complex128)
    if state.epoch == 0:
        init_codebook(state, H_train)

    for _ in tqdm(range(state.epoch, options.epochs), desc='train', disable=not progress):
        train_loss, train_vq, train_rate = train_epoch(state, H_train)
        val_se, _ = summarize(per_sample_rates(state.pipeline, H_validation, config.rho))
        state.epoch += 1
        state.history.append({'epoch': state.epoch, 'train_loss': float(train_loss),
                              'train_vq_loss': float(train_vq), 'train_rate': float(train_rate),
                              'val_se': val_se})
        if val_se > state.best_val_se:
            state.best_val_se = val_se
            state.best_snapshot = copy.deepcopy(state.pipeline.state_dict())
        logger.info("epoch %d: loss=%.4f vq=%.4f rate=%.4f val_se=%.4f",
                    state.epoch, train_loss, train_vq, train_rate, val_se)
        if checkpoint_path is not None:
            save_checkpoint(checkpoint_path, state)
    return state, state.history

import logging
from dataclasses import asdict
from pathlib import Path

import torch

from core.config import SystemConfig, config_hash
from .state import TrainingOptions, build_state

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class CheckpointMismatchError(ValueError):
    pass


def save_checkpoint(path, state):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        'format_version': FORMAT_VERSION,
        'config': state.config.to_dict(),
        'config_hash': state.config_hash,
        'options': asdict(state.options),
        'groups': {name: module.state_dict() for name, module in state.pipeline.parameter_groups().items()},
        'optimizer': state.optimizer.state_dict(),
        'epoch': state.epoch,
        'rng_state': torch.get_rng_state(),
        'best_val_se': state.best_val_se,
        'best_snapshot': state.best_snapshot,
        'history': state.history,
    }
    torch.save(payload, path)
    logger.debug("Checkpoint written to %s (epoch %d)", path, state.epoch)


def load_checkpoint(path, config=None):
    """
    Rebuild a TrainState from `path`. With `config`, refuse a checkpoint
    written for a different configuration.
    """
    payload = torch.load(Path(path), weights_only=True)
    stored = SystemConfig(**payload['config'])
    if payload['config_hash'] != config_hash(stored):
        raise CheckpointMismatchError(f"{path} is corrupt: stored config does not match its hash")
    if config is not None and config_hash(config) != payload['config_hash']:
        raise CheckpointMismatchError(f"{path} was written for a different configuration")
    state = build_state(stored, TrainingOptions(**payload['options']))
    groups = state.pipeline.parameter_groups()
    if set(groups) != set(payload['groups']):
        raise CheckpointMismatchError(f"{path} holds groups {sorted(payload['groups'])}, expected {sorted(groups)}")
    for name, module in groups.items():
        module.load_state_dict(payload['groups'][name])
    state.optimizer.load_state_dict(payload['optimizer'])
    state.epoch = payload['epoch']
    state.best_val_se = payload['best_val_se']
    state.best_snapshot = payload['best_snapshot']
    state.history = list(payload['history'])
    torch.set_rng_state(payload['rng_state'])
    return state

import math
from dataclasses import asdict, dataclass, field

import torch

from core.config import config_hash
from .pipeline import EndToEndPipeline


@dataclass
class TrainingOptions:
    epochs: int = 500
    batch_size: int = 128
    lr: float = 1e-3
    architecture: str = 'gnn'
    freeze_codebook: bool = False
    check_constraints: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not self.lr > 0:
            raise ValueError("lr must be positive")

    def replace(self, **changes):
        return TrainingOptions(**{**asdict(self), **changes})


@dataclass
class TrainState:
    """Everything a checkpoint restores: parameters, optimizer moments, progress and the best snapshot."""
    config: object
    options: TrainingOptions
    pipeline: EndToEndPipeline
    optimizer: torch.optim.Optimizer
    epoch: int = 0
    best_val_se: float = -math.inf
    best_snapshot: dict = None
    history: list = field(default_factory=list)

    @property
    def config_hash(self):
        return config_hash(self.config)

    def restore_best(self):
        if self.best_snapshot is not None:
            self.pipeline.load_state_dict(self.best_snapshot)


def build_state(config, options=None):
    options = options or TrainingOptions()
    pipeline = EndToEndPipeline(config, options.architecture)
    if options.freeze_codebook:
        pipeline.codebook.embedding.requires_grad_(False)
    trainable = [p for p in pipeline.parameters() if p.requires_grad]
    return TrainState(config=config, options=options, pipeline=pipeline,
                      optimizer=torch.optim.Adam(trainable, lr=options.lr))

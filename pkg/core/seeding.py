"""
Every random draw in the project comes from a generator derived here from
SystemConfig.seed and a stream label, so equal configs give equal runs.
"""
import numpy as np
import torch

STREAM_CHANNEL = 1
STREAM_INIT = 2
STREAM_TRAIN = 3
STREAM_EVAL = 4
STREAM_SPLIT = 5
STREAM_BASELINE = 6


def derive_seed(seed, *keys):
    state = np.random.SeedSequence([int(seed), *(int(k) for k in keys)]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def numpy_generator(seed, *keys):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(k) for k in keys)]))


def torch_generator(seed, *keys):
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, *keys) & 0x7FFF_FFFF_FFFF_FFFF)
    return generator

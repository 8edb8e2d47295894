"""
Vector-quantised feedback of received pilots.

The UE flattens its pilot tensor (pilot subchannel by pilot subchannel, real
plane then imaginary plane, each plane RF chain by pilot slot), cuts it into
V-long segments, and feeds back the index of the nearest codeword of each
segment as fixed-width big-endian bit fields.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from core.tensors import REAL_DTYPE, from_planes, to_planes
from pilot.network import ReceivedPilots

logger = logging.getLogger(__name__)


class CorruptFeedbackError(ValueError):
    pass


def split(pilots, V):
    """(..., Kp, NRFr, L) complex -> (..., num_segments, V) real."""
    Y = pilots.Y if isinstance(pilots, ReceivedPilots) else pilots
    flat = to_planes(Y).reshape(*Y.shape[:-3], -1)
    if flat.shape[-1] % V:
        raise ValueError(f"{flat.shape[-1]} pilot entries cannot be cut into segments of {V}")
    return flat.reshape(*Y.shape[:-3], flat.shape[-1] // V, V)


def unsplit(segments, Kp, NRFr, L):
    flat = segments.reshape(*segments.shape[:-2], Kp, 2, NRFr, L)
    return ReceivedPilots(Y=from_planes(flat))


def pack_bits(indices, bits_per_index):
    indices = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(bits_per_index - 1, -1, -1)
    return ((indices[..., None] >> shifts) & 1).astype(np.uint8).reshape(*indices.shape[:-1], -1)


def unpack_bits(bits, bits_per_index):
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1] % bits_per_index:
        raise CorruptFeedbackError(f"Bit stream of length {bits.shape[-1]} is not a whole number of indices")
    fields = bits.reshape(*bits.shape[:-1], -1, bits_per_index)
    weights = 1 << np.arange(bits_per_index - 1, -1, -1)
    return (fields * weights).sum(axis=-1)


@dataclass
class FeedbackMessage:
    indices: np.ndarray
    bits: np.ndarray


class Codebook(nn.Module):
    """D codewords of length V, trained with the rest of the pipeline."""

    def __init__(self, D, V, generator=None):
        super().__init__()
        if D < 2:
            raise ValueError("A codebook needs at least two codewords")
        self.D, self.V = D, V
        self.embedding = nn.Parameter(torch.randn(D, V, generator=generator, dtype=REAL_DTYPE))
        self.register_buffer('usage', torch.zeros(D, dtype=torch.long))

    @property
    def bits_per_index(self):
        return int(math.log2(self.D))

    @torch.no_grad()
    def init_from_segments(self, segments, generator=None):
        """Seed the codewords with D random training segments."""
        pool = segments.reshape(-1, self.V)
        picks = torch.randperm(pool.shape[0], generator=generator)[:self.D]
        if picks.numel() < self.D:
            picks = torch.randint(pool.shape[0], (self.D,), generator=generator)
        self.embedding.copy_(pool[picks])

    def nearest(self, segments):
        """Index of the nearest codeword per segment; ties go to the lowest index."""
        distances = ((segments.detach().unsqueeze(-2) - self.embedding.detach()) ** 2).sum(dim=-1)
        return torch.argmin(distances, dim=-1)

    def lookup(self, indices):
        return self.embedding[indices]

    def quantize(self, segments):
        """
        Returns (indices, codewords, straight_through). The straight-through
        value equals the codewords in the forward pass and passes gradients to
        the segments unchanged.
        """
        indices = self.nearest(segments)
        codewords = self.lookup(indices)
        if self.training:
            self.usage += torch.bincount(indices.reshape(-1), minlength=self.D)
        straight_through = segments + (codewords - segments).detach()
        return indices, codewords, straight_through

    @torch.no_grad()
    def reseed_dead_codewords(self, segments, generator=None):
        """Move codewords unused since the last call onto random training segments."""
        dead = torch.nonzero(self.usage == 0).reshape(-1)
        if dead.numel():
            pool = segments.reshape(-1, self.V)
            picks = torch.randint(pool.shape[0], (dead.numel(),), generator=generator)
            self.embedding[dead] = pool[picks].to(self.embedding.dtype)
            logger.info("Re-seeded %d dead codeword(s)", dead.numel())
        self.usage.zero_()
        return dead.numel()


def encode(pilots, codebook):
    """One sample's pilots -> FeedbackMessage (indices and B-bit stream)."""
    segments = split(pilots, codebook.V)
    indices = codebook.nearest(segments).cpu().numpy()
    return FeedbackMessage(indices=indices, bits=pack_bits(indices, codebook.bits_per_index))


def decode(message, codebook, config):
    """Rebuild the pilot tensor from the fed-back bits (or the indices when no bits are given)."""
    if message.bits is not None and len(message.bits):
        expected = config.num_segments * codebook.bits_per_index
        if len(message.bits) != expected:
            raise CorruptFeedbackError(f"Expected {expected} feedback bits, got {len(message.bits)}")
        indices = unpack_bits(message.bits, codebook.bits_per_index)
    else:
        indices = np.asarray(message.indices)
    if indices.size and (indices.min() < 0 or indices.max() >= codebook.D):
        raise CorruptFeedbackError(f"Codeword index out of range [0, {codebook.D})")
    codewords = codebook.lookup(torch.as_tensor(indices, dtype=torch.long))
    return unsplit(codewords, config.Kp, config.NRFr, config.L)


def vq_loss(segments, codewords, beta):
    """
    Codebook term ||sg(z) - e||^2 plus commitment term beta * ||z - sg(e)||^2,
    summed over each segment and averaged over segments.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    codebook_term = ((segments.detach() - codewords) ** 2).sum(dim=-1)
    commitment_term = ((segments - codewords.detach()) ** 2).sum(dim=-1)
    return (codebook_term + beta * commitment_term).mean()

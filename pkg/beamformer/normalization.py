"""
Projection of raw network (or baseline) outputs onto the hybrid
beamforming constraints: constant-modulus analog entries and a total
transmit power of K*Ns over all subchannels.
"""
import logging
import math

import torch

from .types import HybridBeamformer, HybridCombiner

logger = logging.getLogger(__name__)


class DegenerateBeamformerError(RuntimeError):
    pass


def project_unit_modulus(raw, N):
    """x -> x/|x| / sqrt(N) entry-wise; exact zeros become the phase-0 entry 1/sqrt(N)."""
    zero = raw == 0
    if bool(zero.any()):
        logger.warning("Analog matrix has %d zero entries; substituting phase 0", int(zero.sum()))
        raw = torch.where(zero, torch.ones_like(raw), raw)
    return raw / raw.abs() / math.sqrt(N)


def scale_to_power(beamformer, Ns):
    """Scale every F_BB[k] of a sample by one common factor so sum_k ||F_RF F_BB[k]||^2 = K*Ns."""
    K = beamformer.F_BB.shape[-3]
    total = beamformer.total_power()
    if bool((total == 0).any()):
        raise DegenerateBeamformerError("degenerate beamformer: F_RF F_BB is zero on every subchannel")
    factor = torch.sqrt(K * Ns / total)[..., None, None, None]
    return HybridBeamformer(F_RF=beamformer.F_RF, F_BB=beamformer.F_BB * factor)


def normalize(F_RF, F_BB, config):
    F_RF = project_unit_modulus(F_RF, F_RF.shape[-2])
    return scale_to_power(HybridBeamformer(F_RF=F_RF, F_BB=F_BB), config.Ns)


def normalize_combiner(W_RF, W_BB, config):
    # No power constraint on the receive side; the rate is invariant to W_BB scaling.
    return HybridCombiner(W_RF=project_unit_modulus(W_RF, W_RF.shape[-2]), W_BB=W_BB)

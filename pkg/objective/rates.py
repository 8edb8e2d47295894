"""
Achievable spectral efficiency of a hybrid beamformer / combiner pair and
the end-to-end training loss.
"""
import math
from dataclasses import dataclass

import torch

from core.tensors import COMPLEX_DTYPE, hermitian

RIDGE = 1e-12


class SingularCovarianceError(RuntimeError):
    def __init__(self, subchannel):
        self.subchannel = subchannel
        super().__init__(f"Noise covariance of subchannel {subchannel} is singular")


@dataclass
class RateReport:
    """per_subchannel: (..., K) bits/s/Hz; mean: (...) average over subchannels."""
    per_subchannel: torch.Tensor
    mean: torch.Tensor

    @classmethod
    def from_rates(cls, rates):
        return cls(per_subchannel=rates, mean=rates.mean(dim=-1))


def _cholesky_logdet(matrix):
    factor, info = torch.linalg.cholesky_ex(matrix)
    return factor, info, 2.0 * torch.log(torch.diagonal(factor, dim1=-2, dim2=-1).real).sum(dim=-1)


def link_rates(H, precoders, combiners, rho, sigma_n2):
    """
    log2 det(I + rho/Ns Omega^-1 Lambda Lambda^H) per subchannel, with
    Lambda = W^H H F and Omega = sigma_n^2 W^H W, for effective precoders
    F (..., K, Nt, Ns) and combiners W (..., K, Nr, Ns).
    """
    H = H.to(COMPLEX_DTYPE)
    Ns = precoders.shape[-1]
    Wh = hermitian(combiners)
    Lam = Wh @ H @ precoders
    Omega = sigma_n2 * (Wh @ combiners)
    _, info, logdet_noise = _cholesky_logdet(Omega)
    if bool((info != 0).any()):
        # Ridge only the near-singular subchannels, then retry.
        eye = torch.eye(Ns, dtype=Omega.dtype, device=Omega.device)
        trace = torch.diagonal(Omega, dim1=-2, dim2=-1).real.sum(dim=-1)
        ridge = torch.where(info != 0, RIDGE * trace / Ns, torch.zeros_like(trace))
        Omega = Omega + ridge[..., None, None] * eye
        _, info, logdet_noise = _cholesky_logdet(Omega)
    if bool((info != 0).any()):
        failing = torch.nonzero(info != 0)[0]
        raise SingularCovarianceError(int(failing[-1]))
    _, info, logdet_total = _cholesky_logdet(Omega + (rho / Ns) * (Lam @ hermitian(Lam)))
    if bool((info != 0).any()):
        raise SingularCovarianceError(int(torch.nonzero(info != 0)[0][-1]))
    return ((logdet_total - logdet_noise) / math.log(2.0)).clamp_min(0.0)


def spectral_efficiency(H, beamformer, combiner, rho, sigma_n2, config=None):
    """RateReport for channels H (..., K, Nr, Nt) under a hybrid transceiver."""
    if config is not None and tuple(H.shape[-3:]) != (config.K, config.Nr, config.Nt):
        raise ValueError(f"Channel of shape {tuple(H.shape)} does not match config")
    rates = link_rates(H, beamformer.precoders(), combiner.combiners(), rho, sigma_n2)
    return RateReport.from_rates(rates)


def total_loss(vq_term, rate, alpha):
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    return alpha * vq_term - rate

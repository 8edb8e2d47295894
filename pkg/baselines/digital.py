import torch

from core.tensors import COMPLEX_DTYPE, hermitian
from objective.rates import RateReport, link_rates


def svd_streams(H, Ns):
    """
    Unconstrained per-subchannel transceiver: the top-Ns right singular
    vectors of H[k] as precoder, the top-Ns left singular vectors as combiner.
    """
    U, _, Vh = torch.linalg.svd(H.to(COMPLEX_DTYPE))
    return hermitian(Vh)[..., :Ns], U[..., :Ns]


def fully_digital_svd(H, rho, sigma_n2, config):
    """Rate of fully-digital SVD beamforming with perfect CSI and equal power per stream."""
    F, W = svd_streams(H, config.Ns)
    return RateReport.from_rates(link_rates(H, F, W, rho, sigma_n2))

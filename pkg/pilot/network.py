import math
from dataclasses import dataclass

import torch
from torch import nn

from core.seeding import STREAM_INIT, torch_generator
from core.tensors import COMPLEX_DTYPE, REAL_DTYPE, hermitian


def analog_from_phases(phases, scale):
    """Constant-modulus analog matrix scale * exp(j * phases), differentiable in the phases."""
    return torch.complex(torch.cos(phases), torch.sin(phases)) * scale


def project_pilot_power(symbols, budget):
    """
    Project pilot vectors (last axis) onto the ball ||s||^2 <= budget.

    Vectors inside the ball are returned unchanged.
    """
    if budget <= 0:
        raise ValueError("Pilot power budget must be positive")
    norm = torch.linalg.vector_norm(symbols, dim=-1, keepdim=True)
    limit = math.sqrt(budget)
    factor = torch.where(norm > limit, limit / norm.clamp_min(torch.finfo(norm.dtype).tiny), torch.ones_like(norm))
    return symbols * factor


@dataclass
class ReceivedPilots:
    """Y[k_p] stacked as (..., Kp, NRFr, L)."""
    Y: torch.Tensor

    def check_shape(self, config):
        if tuple(self.Y.shape[-3:]) != (config.Kp, config.NRFr, config.L):
            raise ValueError(f"Received pilots of shape {tuple(self.Y.shape)} do not match config")
        if not torch.isfinite(torch.view_as_real(self.Y)).all():
            raise ValueError("Received pilots contain non-finite entries")


class PilotNetwork(nn.Module):
    """
    Trainable pilot stage: per pilot slot l, BS phases Theta_l (Nt x NRFt),
    UE phases Phi_l (Nr x NRFr) and pilot symbols s_l (NRFt), the latter
    stored as real/imaginary pairs.
    """

    def __init__(self, config, generator=None):
        super().__init__()
        self.config = config
        if generator is None:
            generator = torch_generator(config.seed, STREAM_INIT, 0)
        L = config.L
        two_pi = 2 * math.pi
        self.theta = nn.Parameter(torch.rand(L, config.Nt, config.NRFt, generator=generator, dtype=REAL_DTYPE) * two_pi)
        self.phi = nn.Parameter(torch.rand(L, config.Nr, config.NRFr, generator=generator, dtype=REAL_DTYPE) * two_pi)
        symbols = torch.randn(L, config.NRFt, 2, generator=generator, dtype=REAL_DTYPE) / math.sqrt(2.0)
        symbols = torch.view_as_real(project_pilot_power(torch.view_as_complex(symbols), config.NRFt))
        self.symbols = nn.Parameter(symbols.contiguous())

    @property
    def s(self):
        return torch.view_as_complex(self.symbols)

    def analog_beamformers(self):
        """F~_RF,l for every pilot slot, shape (L, Nt, NRFt)."""
        return analog_from_phases(self.theta, 1.0 / math.sqrt(self.config.Nt))

    def analog_combiners(self):
        """W~_RF,l for every pilot slot, shape (L, Nr, NRFr)."""
        return analog_from_phases(self.phi, 1.0 / math.sqrt(self.config.Nr))

    @torch.no_grad()
    def project_(self):
        """Restore ||s_l||^2 <= NRFt in place; called after every optimizer step."""
        projected = project_pilot_power(self.s, self.config.NRFt)
        self.symbols.copy_(torch.view_as_real(projected))

    def forward(self, H, generator=None, noise=None):
        return transmit_pilots(H, self, self.config, generator=generator, noise=noise)


def pilot_noise(batch_size, config, generator=None):
    """CN(0, sigma_n^2 I) noise for every pilot subchannel and slot, (batch, Kp, L, Nr)."""
    shape = (batch_size, config.Kp, config.L, config.Nr, 2)
    noise = torch.randn(shape, generator=generator, dtype=REAL_DTYPE) * math.sqrt(config.sigma_n2 / 2.0)
    return torch.view_as_complex(noise)


def seeded_pilot_noise(seeds, config):
    """Noise drawn sample by sample, so a sample's noise does not depend on its batch."""
    draws = []
    for seed in seeds:
        generator = torch.Generator()
        generator.manual_seed(int(seed))
        draws.append(pilot_noise(1, config, generator))
    return torch.cat(draws, dim=0)


def transmit_pilots(H, pilot, config, generator=None, noise=None):
    """
    y_l[k_p] = sqrt(rho_p) W~_l^H H[k_p] F~_l s_l + W~_l^H n_l[k_p] on the
    pilot subchannels of a batch of channels H (batch, K, Nr, Nt).
    """
    if tuple(H.shape[-3:]) != (config.K, config.Nr, config.Nt):
        raise ValueError(f"Channel of shape {tuple(H.shape)} does not match config "
                         f"(K={config.K}, Nr={config.Nr}, Nt={config.Nt})")
    H = H.to(COMPLEX_DTYPE)
    squeeze = H.dim() == 3
    if squeeze:
        H = H.unsqueeze(0)

    H_pilot = H[:, ::config.M][:, :config.Kp]
    F = pilot.analog_beamformers()
    W = pilot.analog_combiners()
    sounding = torch.einsum('ltc,lc->lt', F, pilot.s)

    Y = math.sqrt(config.rho_p) * torch.einsum('lrc,bkrt,lt->bkcl', W.conj(), H_pilot, sounding)
    if noise is None and config.sigma_n2 > 0:
        noise = pilot_noise(H.shape[0], config, generator)
    if noise is not None:
        Y = Y + torch.einsum('lrc,bklr->bkcl', W.conj(), noise)

    return ReceivedPilots(Y=Y[0] if squeeze else Y)


def combiner_gram(pilot):
    """W~_l^H W~_l per slot; the noise covariance of y_l[k_p] is sigma_n^2 times this."""
    W = pilot.analog_combiners()
    return hermitian(W) @ W

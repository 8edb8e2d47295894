"""
The trainable end-to-end chain for one batch of channels:

pilots -> noise-normalised Y -> segments -> codewords (straight-through)
-> Y_hat at the BS -> HB network on Y_hat, HC network on Y -> rate and loss.
"""
import math
from dataclasses import dataclass

import torch
from torch import nn

from baselines.mlp import MlpBeamformer
from beamformer.gnn import BS_SIDE, UE_SIDE, HybridGNN
from core.seeding import STREAM_INIT, torch_generator
from feedback.quantizer import Codebook, split, unsplit, vq_loss
from objective.rates import spectral_efficiency, total_loss
from pilot.network import PilotNetwork, ReceivedPilots

ARCHITECTURES = {
    'gnn': HybridGNN,
    'mlp': MlpBeamformer,
}


@dataclass
class PipelineOutput:
    loss: torch.Tensor
    vq_loss: torch.Tensor
    rate: torch.Tensor
    per_sample_rate: torch.Tensor
    segments: torch.Tensor
    indices: torch.Tensor
    beamformer: object
    combiner: object


class EndToEndPipeline(nn.Module):
    def __init__(self, config, architecture='gnn'):
        super().__init__()
        if architecture not in ARCHITECTURES:
            raise ValueError(f"Unknown architecture {architecture!r}; choose from {sorted(ARCHITECTURES)}")
        self.config = config
        self.architecture = architecture
        network = ARCHITECTURES[architecture]
        self.pilot = PilotNetwork(config)
        self.codebook = Codebook(config.D, config.V, generator=torch_generator(config.seed, STREAM_INIT, 5))
        self.beamformer_net = network(config, BS_SIDE)
        self.combiner_net = network(config, UE_SIDE)

    def parameter_groups(self):
        """Named modules as stored in checkpoints."""
        return {
            'pilot': self.pilot,
            'codebook': self.codebook,
            f'hb_{self.architecture}': self.beamformer_net,
            f'hc_{self.architecture}': self.combiner_net,
        }

    def received(self, H, generator=None, noise=None):
        """Pilots in noise-normalised units, Y / sigma_n."""
        pilots = self.pilot(H, generator=generator, noise=noise)
        return ReceivedPilots(Y=pilots.Y / math.sqrt(self.config.sigma_n2))

    def forward(self, H, generator=None, noise=None, rho=None):
        config = self.config
        rho = config.rho if rho is None else rho
        H = H.to(torch.complex128)
        Y = self.received(H, generator=generator, noise=noise).Y

        segments = split(Y, config.V)
        indices, codewords, straight_through = self.codebook.quantize(segments)
        Y_hat = unsplit(straight_through, config.Kp, config.NRFr, config.L)

        beamformer = self.beamformer_net(Y_hat)
        combiner = self.combiner_net(Y)
        report = spectral_efficiency(H, beamformer, combiner, rho, config.sigma_n2, config)
        quantization = vq_loss(segments, codewords, config.beta)
        rate = report.mean.mean()
        return PipelineOutput(
            loss=total_loss(quantization, rate, config.alpha),
            vq_loss=quantization,
            rate=rate,
            per_sample_rate=report.mean,
            segments=segments.detach(),
            indices=indices,
            beamformer=beamformer,
            combiner=combiner,
        )

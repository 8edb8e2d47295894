import torch
from torch import nn

from beamformer.gnn import BS_SIDE, UE_SIDE, finalize, read_out, reset_linear_layers, state_dims
from beamformer.types import NodeStates
from core.seeding import STREAM_INIT, torch_generator
from core.tensors import REAL_DTYPE, pack_complex
from pilot.network import ReceivedPilots


class MlpBeamformer(nn.Module):
    """
    Fully-connected ablation of HybridGNN: G+1 dense layers from the whole
    flattened pilot tensor to K digital states and one analog state, read out
    and normalised exactly like the GNN.
    """

    def __init__(self, config, side=BS_SIDE, generator=None):
        super().__init__()
        if side not in (BS_SIDE, UE_SIDE):
            raise ValueError(f"Unknown side {side!r}")
        self.config = config
        self.side = side
        self.dim_c, self.dim_v = state_dims(config, side)
        width = self.output_dim
        sizes = [config.Kp * config.group_input_dim] + [width] * (config.G + 1)
        stages = []
        for g, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            stages.append(nn.Linear(fan_in, fan_out, dtype=REAL_DTYPE))
            if g < config.G:
                stages.append(nn.SiLU())
        self.stages = nn.Sequential(*stages)
        if generator is None:
            generator = torch_generator(config.seed, STREAM_INIT, 3 if side == BS_SIDE else 4)
        reset_linear_layers(self, generator)

    @property
    def output_dim(self):
        return self.config.K * self.dim_c + self.dim_v

    def forward(self, pilots):
        Y = pilots.Y if isinstance(pilots, ReceivedPilots) else pilots
        ReceivedPilots(Y=Y).check_shape(self.config)
        flat = pack_complex(Y.to(torch.complex128))
        out = self.stages(flat.reshape(*flat.shape[:-2], -1))
        split = self.config.K * self.dim_c
        states = NodeStates(c=out[..., :split].reshape(*out.shape[:-1], self.config.K, self.dim_c),
                            v=out[..., split:])
        return finalize(*read_out(states, self.config, self.side), self.config, self.side)


def mlp_beamformer_forward(Yhat, mlp, config):
    if mlp.side != BS_SIDE:
        raise ValueError("BS-side MLP expected")
    return mlp(Yhat)


def mlp_combiner_forward(Y, mlp, config):
    if mlp.side != UE_SIDE:
        raise ValueError("UE-side MLP expected")
    return mlp(Y)

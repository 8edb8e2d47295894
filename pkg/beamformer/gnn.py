"""
HB-GNN (BS side) and HC-GNN (UE side).

Both run on the star graph of one analog node and K digital nodes. The
received pilots are split into Kp groups: the digital states of the M
subchannels around pilot subchannel k_p are initialised from that
subchannel's pilots alone, the analog state from the mean over all groups.
"""
import math

import torch
from torch import nn

from core.seeding import STREAM_INIT, torch_generator
from core.tensors import REAL_DTYPE, pack_complex, unpack_complex
from pilot.network import ReceivedPilots
from .normalization import normalize, normalize_combiner
from .types import NodeStates

BS_SIDE = 'bs'
UE_SIDE = 'ue'


def side_antennas(config, side):
    return (config.Nt, config.NRFt) if side == BS_SIDE else (config.Nr, config.NRFr)


def state_dims(config, side):
    """(dim_c, dim_v) = (2*NRF*Ns, 2*NRF*N) for the given side."""
    N, NRF = side_antennas(config, side)
    return 2 * NRF * config.Ns, 2 * NRF * N


def read_out(states, config, side):
    """Raw (analog, digital) matrices from final states, using the core vectorisation."""
    N, NRF = side_antennas(config, side)
    states.check(config.K)
    return unpack_complex(states.v, N, NRF), unpack_complex(states.c, NRF, config.Ns)


def finalize(analog, digital, config, side):
    if side == BS_SIDE:
        return normalize(analog, digital, config)
    return normalize_combiner(analog, digital, config)


def reset_linear_layers(module, generator):
    """Fan-in scaled uniform init of every nn.Linear under module, drawn from a seeded generator."""
    with torch.no_grad():
        for layer in module.modules():
            if isinstance(layer, nn.Linear):
                bound = 1.0 / math.sqrt(layer.in_features)
                layer.weight.uniform_(-bound, bound, generator=generator)
                layer.bias.uniform_(-bound, bound, generator=generator)


def _linear(fan_in, fan_out):
    return nn.Linear(fan_in, fan_out, dtype=REAL_DTYPE)


class MessagePassingLayer(nn.Module):
    """
    v <- f1(v) + f2(mean_k c_k)
    c_k <- f3(c_k) + f4(v)

    f1..f4 are single affine maps followed by SiLU, except on the last
    layer where the outputs stay affine so read-out values can be negative.
    """

    def __init__(self, dim_c, dim_v, final=False):
        super().__init__()
        self.f1 = _linear(dim_v, dim_v)
        self.f2 = _linear(dim_c, dim_v)
        self.f3 = _linear(dim_c, dim_c)
        self.f4 = _linear(dim_v, dim_c)
        self.activation = nn.Identity() if final else nn.SiLU()

    def forward(self, states):
        act = self.activation
        v = act(self.f1(states.v)) + act(self.f2(states.c.mean(dim=-2)))
        c = act(self.f3(states.c)) + act(self.f4(states.v)).unsqueeze(-2)
        return NodeStates(c=c, v=v)


class HybridGNN(nn.Module):
    def __init__(self, config, side=BS_SIDE, generator=None):
        super().__init__()
        if side not in (BS_SIDE, UE_SIDE):
            raise ValueError(f"Unknown side {side!r}")
        self.config = config
        self.side = side
        self.dim_c, self.dim_v = state_dims(config, side)
        self.I_BB = _linear(config.group_input_dim, config.M * self.dim_c)
        self.I_RF = _linear(config.group_input_dim, self.dim_v)
        self.layers = nn.ModuleList(
            MessagePassingLayer(self.dim_c, self.dim_v, final=g == config.G) for g in range(1, config.G + 1)
        )
        self.activation = nn.SiLU()
        if generator is None:
            generator = torch_generator(config.seed, STREAM_INIT, 1 if side == BS_SIDE else 2)
        reset_linear_layers(self, generator)

    def init_nodes(self, pilots):
        Y = pilots.Y if isinstance(pilots, ReceivedPilots) else pilots
        ReceivedPilots(Y=Y).check_shape(self.config)
        groups = pack_complex(Y.to(torch.complex128))
        c = self.activation(self.I_BB(groups))
        c = c.reshape(*c.shape[:-2], self.config.K, self.dim_c)
        v = self.activation(self.I_RF(groups.mean(dim=-2)))
        return NodeStates(c=c, v=v)

    def message_pass(self, states, g):
        if not 1 <= g <= self.config.G:
            raise ValueError(f"Layer index {g} outside 1..{self.config.G}")
        return self.layers[g - 1](states)

    def read_out(self, states):
        return read_out(states, self.config, self.side)

    def forward(self, pilots):
        states = self.init_nodes(pilots)
        for g in range(1, self.config.G + 1):
            states = self.message_pass(states, g)
        return finalize(*self.read_out(states), self.config, self.side)


def _check_params(params, config, side):
    own = params.config
    dims = (own.K, own.Kp, own.NRFr, own.L, own.Ns, side_antennas(own, side))
    expected = (config.K, config.Kp, config.NRFr, config.L, config.Ns, side_antennas(config, side))
    if params.side != side or dims != expected:
        raise ValueError(f"Network parameters do not match the {side.upper()} side of this config")


def hb_gnn_forward(Yhat, params, config):
    _check_params(params, config, BS_SIDE)
    return params(Yhat)


def hc_gnn_forward(Y, params, config):
    _check_params(params, config, UE_SIDE)
    return params(Y)

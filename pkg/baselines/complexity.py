"""
Asymptotic operation counts per forward pass / design, as leading-order
terms (constants dropped), and trainable parameter counts.

The convolutional reference design scales as D*K*N^2*Mbar^2*Cbar^2 for D
layers of average kernel size Mbar with Cbar channels. Only its operation
count is tabulated; the network itself is not built here, so it has no
parameter count.
"""
from beamformer.gnn import BS_SIDE, UE_SIDE, side_antennas, state_dims

CONV_LAYERS = 3
CONV_KERNEL = 3
CONV_CHANNELS = 32


def _affine(fan_in, fan_out):
    return fan_in * fan_out + fan_out


def gnn_operations(config, side=BS_SIDE):
    N, NRF = side_antennas(config, side)
    Ns, K = config.Ns, config.K
    return config.G * NRF ** 2 * (K * Ns ** 2 + Ns * N + N ** 2)


def mlp_operations(config, side=BS_SIDE):
    N, NRF = side_antennas(config, side)
    Ns, K = config.Ns, config.K
    return config.G * NRF ** 2 * (K ** 2 * Ns ** 2 + K * Ns * N + N ** 2)


def mo_operations(config, iterations, side=BS_SIDE):
    N, NRF = side_antennas(config, side)
    return iterations * config.K ** 2 * NRF * config.Ns ** 2 * N ** 3


def conv_operations(config, side=BS_SIDE, layers=CONV_LAYERS, kernel=CONV_KERNEL, channels=CONV_CHANNELS):
    N, _ = side_antennas(config, side)
    return layers * config.K * N ** 2 * kernel ** 2 * channels ** 2


def gnn_parameters(config, side=BS_SIDE):
    dim_c, dim_v = state_dims(config, side)
    inputs = config.group_input_dim
    per_layer = _affine(dim_v, dim_v) + _affine(dim_c, dim_v) + _affine(dim_c, dim_c) + _affine(dim_v, dim_c)
    return _affine(inputs, config.M * dim_c) + _affine(inputs, dim_v) + config.G * per_layer


def mlp_parameters(config, side=BS_SIDE):
    dim_c, dim_v = state_dims(config, side)
    width = config.K * dim_c + dim_v
    return _affine(config.Kp * config.group_input_dim, width) + config.G * _affine(width, width)


def parameter_count(module):
    return sum(p.numel() for p in module.parameters() if p.requires_grad)


def complexity_table(config, mo_iterations=200, conv_layers=CONV_LAYERS, conv_kernel=CONV_KERNEL,
                     conv_channels=CONV_CHANNELS):
    """One row per scheme and side."""
    rows = []
    for side in (BS_SIDE, UE_SIDE):
        rows.append({'method': 'gnn', 'side': side, 'operations': gnn_operations(config, side),
                     'parameters': gnn_parameters(config, side)})
        rows.append({'method': 'mlp', 'side': side, 'operations': mlp_operations(config, side),
                     'parameters': mlp_parameters(config, side)})
        rows.append({'method': 'mo', 'side': side, 'operations': mo_operations(config, mo_iterations, side),
                     'parameters': 0})
        rows.append({'method': 'cnn', 'side': side,
                     'operations': conv_operations(config, side, conv_layers, conv_kernel, conv_channels),
                     'parameters': None})
    return rows

"""
OMP channel estimation from the same received pilots the learned pipeline
sees. The channel on a pilot subchannel is modelled as A_r X A_t^H with a
sparse angular gain matrix X over an oversampled angle grid; estimates on
the other subchannels interpolate X linearly along the subchannel index.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import torch

from core.tensors import COMPLEX_DTYPE
from pilot.network import ReceivedPilots

logger = logging.getLogger(__name__)

DEFAULT_NUM_PATHS = 8


class SensingMatrixError(ValueError):
    pass


def grid_response(num_antennas, grid_size):
    """Unit-norm ULA responses on a grid uniform in sin(angle) over [-1, 1)."""
    sines = -1.0 + 2.0 * np.arange(grid_size) / grid_size
    n = np.arange(num_antennas)[:, None]
    return np.exp(1j * np.pi * n * sines[None, :]) / math.sqrt(num_antennas)


@dataclass
class AngleDictionary:
    A_t: np.ndarray
    A_r: np.ndarray

    @classmethod
    def for_config(cls, config, Gt=None, Gr=None):
        return cls(A_t=grid_response(config.Nt, Gt or 2 * config.Nt),
                   A_r=grid_response(config.Nr, Gr or 2 * config.Nr))

    @property
    def shape(self):
        return self.A_r.shape[1], self.A_t.shape[1]

    def channel(self, gains):
        """A_r X A_t^H for angular gains X (..., Gr, Gt)."""
        return self.A_r @ gains @ self.A_t.conj().T


def sensing_matrix(pilot, dictionary, rho_p):
    """
    Map from vec(X) (index gt * Gr + gr) to the stacked pilot observations
    [y_1; ...; y_L] of one pilot subchannel.
    """
    with torch.no_grad():
        F = pilot.analog_beamformers().cpu().numpy()
        W = pilot.analog_combiners().cpu().numpy()
        s = pilot.s.cpu().numpy()
    blocks = []
    for l in range(F.shape[0]):
        transmit = dictionary.A_t.conj().T @ (F[l] @ s[l])
        receive = W[l].conj().T @ dictionary.A_r
        blocks.append(math.sqrt(rho_p) * np.kron(transmit[None, :], receive))
    return np.concatenate(blocks, axis=0)


def omp(Psi, y, n_paths):
    """
    Greedy OMP with least-squares gains. Returns (support, gains, residual
    norms), the residual norms starting with ||y||.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    if n_paths > Psi.shape[0]:
        raise SensingMatrixError(
            f"{Psi.shape[0]} pilot observations cannot resolve {n_paths} paths; lengthen the pilots")
    norms = np.linalg.norm(Psi, axis=0)
    norms[norms == 0] = np.inf
    support = []
    residual = y.copy()
    residual_norms = [np.linalg.norm(residual)]
    gains = np.zeros(0, dtype=Psi.dtype)
    for _ in range(n_paths):
        scores = np.abs(Psi.conj().T @ residual) / norms
        scores[support] = -1.0
        support.append(int(np.argmax(scores)))
        gains, *_ = np.linalg.lstsq(Psi[:, support], y, rcond=None)
        residual = y - Psi[:, support] @ gains
        residual_norms.append(np.linalg.norm(residual))
    return support, gains, residual_norms


def interpolate_gains(pilot_gains, K, M):
    """Linear interpolation of (Kp, Gr, Gt) gains onto all K subchannels, flat past the last pilot."""
    Kp = pilot_gains.shape[0]
    position = np.arange(K) / M
    lower = np.minimum(np.floor(position).astype(int), Kp - 1)
    upper = np.minimum(lower + 1, Kp - 1)
    weight = np.where(lower == upper, 0.0, position - lower)[:, None, None]
    return (1 - weight) * pilot_gains[lower] + weight * pilot_gains[upper]


def omp_channel_estimate(pilots, pilot, dictionary, n_paths, config):
    """Estimated channel (K, Nr, Nt) from one sample's received pilots."""
    Y = pilots.Y if isinstance(pilots, ReceivedPilots) else pilots
    ReceivedPilots(Y=Y).check_shape(config)
    Psi = sensing_matrix(pilot, dictionary, config.rho_p)
    Gr, Gt = dictionary.shape
    observations = Y.detach().cpu().numpy()
    pilot_gains = np.zeros((config.Kp, Gr, Gt), dtype=np.complex128)
    for kp in range(config.Kp):
        # column l of Y[kp] is y_l
        y = observations[kp].T.reshape(-1)
        support, gains, _ = omp(Psi, y, n_paths)
        flat = np.zeros(Gr * Gt, dtype=np.complex128)
        flat[support] = gains
        pilot_gains[kp] = flat.reshape(Gt, Gr).T
    estimate = dictionary.channel(interpolate_gains(pilot_gains, config.K, config.M))
    return torch.from_numpy(estimate).to(COMPLEX_DTYPE)


def nmse(estimate, H):
    """Per-sample ||H_est - H||^2 / ||H||^2 averaged over the leading axis."""
    H = H.to(COMPLEX_DTYPE)
    error = (estimate.to(COMPLEX_DTYPE) - H).abs().pow(2).sum(dim=(-3, -2, -1))
    return float((error / H.abs().pow(2).sum(dim=(-3, -2, -1))).mean())

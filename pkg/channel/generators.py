"""
Clustered (Saleh-Valenzuela style) wideband channels between two uniform
linear arrays with half-wavelength spacing.
"""
import logging
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np

from core.config import DEFAULT_BANDWIDTH_HZ, DEFAULT_CARRIER_HZ
from core.seeding import STREAM_CHANNEL, derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusterParams:
    num_clusters: int = 4
    rays_per_cluster: int = 5
    angle_spread_deg: float = 7.5
    max_delay_s: float = 100e-9
    carrier_hz: float = DEFAULT_CARRIER_HZ
    bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ
    path_loss_db: float = 0.0

    def __post_init__(self):
        if self.num_clusters < 1:
            raise ValueError("num_clusters must be at least 1")
        if self.rays_per_cluster < 1:
            raise ValueError("rays_per_cluster must be at least 1")
        if self.max_delay_s < 0:
            raise ValueError("max_delay_s must be non-negative")
        if self.angle_spread_deg < 0:
            raise ValueError("angle_spread_deg must be non-negative")
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("carrier_hz and bandwidth_hz must be positive")


@dataclass(frozen=True)
class ChannelRealization:
    """Frequency response H[k] of one sample, shape (K, Nr, Nt)."""
    H: np.ndarray

    def __post_init__(self):
        if self.H.ndim != 3:
            raise ValueError(f"Expected a (K, Nr, Nt) tensor, got shape {self.H.shape}")
        if not np.all(np.isfinite(self.H)):
            raise ValueError("Channel realization has non-finite entries")

    def check_shape(self, config):
        expected = (config.K, config.Nr, config.Nt)
        if self.H.shape != expected:
            raise ValueError(f"Channel shape {self.H.shape} does not match config {expected}")


def array_response(num_antennas, angles):
    """Unit-norm ULA steering vectors, one column per angle (radians)."""
    n = np.arange(num_antennas)[:, None]
    return np.exp(1j * np.pi * n * np.sin(np.asarray(angles))[None, :]) / np.sqrt(num_antennas)


def subchannel_frequencies(K, bandwidth_hz):
    """Baseband frequency offset of each subchannel centre."""
    return (np.arange(K) / K - 0.5) * bandwidth_hz


def generate_clustered_channel(config, params, seed):
    rng = np.random.default_rng(seed)
    num_clusters, num_rays = params.num_clusters, params.rays_per_cluster

    cluster_aod = rng.uniform(-np.pi / 2, np.pi / 2, num_clusters)
    cluster_aoa = rng.uniform(-np.pi / 2, np.pi / 2, num_clusters)
    delays = rng.uniform(0.0, params.max_delay_s, num_clusters)

    # Laplacian with standard deviation equal to the angle spread
    scale = np.deg2rad(params.angle_spread_deg) / np.sqrt(2.0)
    aod = cluster_aod[:, None] + rng.laplace(0.0, scale, (num_clusters, num_rays))
    aoa = cluster_aoa[:, None] + rng.laplace(0.0, scale, (num_clusters, num_rays))
    gains = (rng.standard_normal((num_clusters, num_rays))
             + 1j * rng.standard_normal((num_clusters, num_rays))) / np.sqrt(2.0)

    freqs = subchannel_frequencies(config.K, params.bandwidth_hz)
    phases = np.exp(-2j * np.pi * freqs[:, None] * delays[None, :])
    weights = (phases[:, :, None] * gains[None, :, :]).reshape(config.K, -1)

    a_r = array_response(config.Nr, aoa.ravel())
    a_t = array_response(config.Nt, aod.ravel())
    norm = np.sqrt(config.Nt * config.Nr / (num_clusters * num_rays)) * 10.0 ** (-params.path_loss_db / 20.0)

    H = norm * np.einsum('rp,kp,tp->krt', a_r, weights, a_t.conj())
    return ChannelRealization(H=H)


def _generate_sample(args):
    config, params, seed = args
    realization = generate_clustered_channel(config, params, seed)
    realization.check_shape(config)
    return realization.H.astype(np.complex64)


def generate_dataset(config, params, num_samples, jobs=1):
    """
    Stack `num_samples` realizations, shape (N, K, Nr, Nt), complex64.

    Sample i is drawn from a seed derived from (config.seed, i) so the result
    does not depend on `jobs`.
    """
    tasks = [(config, params, derive_seed(config.seed, STREAM_CHANNEL, index)) for index in range(num_samples)]
    logger.info("Generating %d channel samples (jobs=%d)", num_samples, jobs)
    if jobs > 1:
        with Pool(jobs) as pool:
            samples = pool.map(_generate_sample, tasks)
    else:
        samples = [_generate_sample(task) for task in tasks]
    if not samples:
        return np.zeros((0, config.K, config.Nr, config.Nt), dtype=np.complex64)
    return np.stack(samples)

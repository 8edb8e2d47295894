import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass

from .units import dbm_to_mw, noise_power_from_psd

# Reference scenario: 60 GHz carrier, 100 MHz band, -161 dBm/Hz noise floor.
DEFAULT_CARRIER_HZ = 60e9
DEFAULT_BANDWIDTH_HZ = 100e6
DEFAULT_NOISE_PSD_DBM_PER_HZ = -161.0
DEFAULT_POWER_DBM = 10.0


@dataclass(frozen=True)
class SystemConfig:
    """
    Dimensions and physical constants of one FDD MIMO-OFDM link.

    Powers are linear milliwatts; the dBm forms only exist at the config
    file / command line boundary.
    """
    Nt: int = 64
    Nr: int = 4
    NRFt: int = 4
    NRFr: int = 2
    Ns: int = 2
    K: int = 128
    Kp: int = 16
    M: int = 8
    L: int = 16
    rho: float = dbm_to_mw(DEFAULT_POWER_DBM)
    rho_p: float = dbm_to_mw(DEFAULT_POWER_DBM)
    sigma_n2: float = noise_power_from_psd(DEFAULT_NOISE_PSD_DBM_PER_HZ, DEFAULT_BANDWIDTH_HZ, 128)
    B: int = 512
    D: int = 16
    V: int = 8
    G: int = 4
    alpha: float = 0.2
    beta: float = 0.25
    seed: int = 0

    @property
    def pilot_subchannels(self):
        """Zero-based indices of the pilot-bearing subchannels: 0, M, ..., (Kp-1)M."""
        return list(range(0, self.Kp * self.M, self.M))

    @property
    def pilot_entries(self):
        """Real entries of one received pilot tensor (real and imaginary planes)."""
        return 2 * self.Kp * self.NRFr * self.L

    @property
    def num_segments(self):
        return self.pilot_entries // self.V

    @property
    def bits_per_index(self):
        return int(math.log2(self.D))

    @property
    def group_input_dim(self):
        """Size of the real vector describing one pilot subchannel, 2*NRFr*L."""
        return 2 * self.NRFr * self.L

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


def field_names():
    return [f.name for f in dataclasses.fields(SystemConfig)]


def config_hash(config):
    payload = json.dumps(config.to_dict(), sort_keys=True)
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()

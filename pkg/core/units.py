import math


def dbm_to_mw(value_dbm):
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw):
    if value_mw <= 0:
        raise ValueError("Power must be positive to be expressed in dBm")
    return 10.0 * math.log10(value_mw)


def noise_power_from_psd(psd_dbm_per_hz, bandwidth_hz, K):
    """
    Linear per-subchannel noise power (mW) for a noise PSD spread over a band
    split into K equal subchannels.
    """
    if bandwidth_hz <= 0:
        raise ValueError("Bandwidth must be strictly positive")
    if K < 1:
        raise ValueError("At least one subchannel is required")
    return dbm_to_mw(psd_dbm_per_hz + 10.0 * math.log10(bandwidth_hz / K))

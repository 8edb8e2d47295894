# Feedback bits B -> (codebook size D, codeword length V) for Kp=16, NRFr=2, L=16.
FEEDBACK_PRESETS = {
    32: (2, 32),
    64: (4, 32),
    96: (8, 32),
    128: (4, 16),
    192: (8, 16),
    256: (16, 16),
    512: (16, 8),
    768: (8, 4),
    1024: (16, 4),
}


def preset_for(bits, config=None):
    """
    (D, V) for a bit budget. With a config, the codeword length is rescaled so
    the segment count keeps the same ratio to the pilot tensor size as in the
    reference dimensions.
    """
    if bits not in FEEDBACK_PRESETS:
        raise KeyError(f"No feedback preset for B={bits}; known: {sorted(FEEDBACK_PRESETS)}")
    D, V = FEEDBACK_PRESETS[bits]
    if config is None:
        return D, V
    reference_entries = 2 * 16 * 2 * 16
    scaled = V * config.pilot_entries // reference_entries
    if scaled < 1 or config.pilot_entries % scaled:
        raise ValueError(f"B={bits} has no integral codeword length for {config.pilot_entries} pilot entries")
    return D, scaled


def configure_feedback(config, bits):
    """Config with B, D and V set for a preset bit budget at the config's dimensions."""
    D, V = preset_for(bits, config)
    segments = config.pilot_entries // V
    return config.replace(B=segments * (D.bit_length() - 1), D=D, V=V)

from django.core.exceptions import ValidationError


def _is_power_of_two(value):
    return value >= 1 and value & (value - 1) == 0


class SystemConfigValidator:
    """Dimensional and physical invariants every SystemConfig must satisfy."""

    def __init__(self):
        self.error_message_positive = "{name} must be a positive integer (got {value})."
        self.error_message_antennas = "{side}: {antennas} must exceed {chains} ({a} <= {c})."
        self.error_message_streams = "Ns exceeds {chains} ({ns} > {c})."
        self.error_message_subchannels = "K must equal Kp*M ({K} != {Kp}*{M})."
        self.error_message_codebook = "D must be a power of two and at least 2 (got {D})."
        self.error_message_divisibility = "2*Kp*NRFr*L = {entries} is not divisible by V = {V}."
        self.error_message_bits = "B must equal (2*Kp*NRFr*L/V)*log2(D) = {expected} (got {B})."
        self.error_message_power = "{name} must be {bound} (got {value})."

    def _fail(self, message):
        raise ValidationError(message, code='dimension_error')

    def validate(self, config):
        for name in ('Nt', 'Nr', 'NRFt', 'NRFr', 'Ns', 'K', 'Kp', 'M', 'L', 'B', 'D', 'V', 'G'):
            value = getattr(config, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                self._fail(self.error_message_positive.format(name=name, value=value))

        # BS side first, then UE side
        if config.Ns > config.NRFt:
            self._fail(self.error_message_streams.format(chains='NRFt', ns=config.Ns, c=config.NRFt))
        if config.Nt <= config.NRFt:
            self._fail(self.error_message_antennas.format(
                side='BS', antennas='Nt', chains='NRFt', a=config.Nt, c=config.NRFt))
        if config.Ns > config.NRFr:
            self._fail(self.error_message_streams.format(chains='NRFr', ns=config.Ns, c=config.NRFr))
        if config.Nr <= config.NRFr:
            self._fail(self.error_message_antennas.format(
                side='UE', antennas='Nr', chains='NRFr', a=config.Nr, c=config.NRFr))

        if config.K != config.Kp * config.M:
            self._fail(self.error_message_subchannels.format(K=config.K, Kp=config.Kp, M=config.M))

        if config.D < 2 or not _is_power_of_two(config.D):
            self._fail(self.error_message_codebook.format(D=config.D))

        if config.pilot_entries % config.V:
            self._fail(self.error_message_divisibility.format(entries=config.pilot_entries, V=config.V))

        expected = config.num_segments * config.bits_per_index
        if config.B != expected:
            self._fail(self.error_message_bits.format(expected=expected, B=config.B))

        if not config.sigma_n2 > 0:
            self._fail(self.error_message_power.format(name='sigma_n2', bound='positive', value=config.sigma_n2))
        for name in ('rho', 'rho_p', 'alpha', 'beta'):
            value = getattr(config, name)
            if not value >= 0:
                self._fail(self.error_message_power.format(name=name, bound='non-negative', value=value))

    def get_help_text(self):
        return (
            "Nt > NRFt >= Ns, Nr > NRFr >= Ns, K = Kp*M, D a power of two, "
            "V dividing 2*Kp*NRFr*L and B = (2*Kp*NRFr*L/V)*log2(D)."
        )


def validate(config):
    """Return the config unchanged when every invariant holds."""
    SystemConfigValidator().validate(config)
    return config

from django.core.exceptions import ValidationError
from rest_framework import serializers

from .config import SystemConfig, DEFAULT_BANDWIDTH_HZ
from .units import dbm_to_mw, noise_power_from_psd
from .validators import SystemConfigValidator


class SystemConfigSerializer(serializers.Serializer):
    """
    Reads the `system` section of an experiment config file.

    Powers may be given linearly (rho, rho_p, sigma_n2, in mW) or at the dBm
    boundary (rho_dbm, rho_p_dbm, noise_psd_dbm_per_hz with bandwidth_hz).
    """
    Nt = serializers.IntegerField(required=False, min_value=1)
    Nr = serializers.IntegerField(required=False, min_value=1)
    NRFt = serializers.IntegerField(required=False, min_value=1)
    NRFr = serializers.IntegerField(required=False, min_value=1)
    Ns = serializers.IntegerField(required=False, min_value=1)
    K = serializers.IntegerField(required=False, min_value=1)
    Kp = serializers.IntegerField(required=False, min_value=1)
    M = serializers.IntegerField(required=False, min_value=1)
    L = serializers.IntegerField(required=False, min_value=1)
    rho = serializers.FloatField(required=False, min_value=0.0)
    rho_p = serializers.FloatField(required=False, min_value=0.0)
    sigma_n2 = serializers.FloatField(required=False)
    B = serializers.IntegerField(required=False, min_value=1)
    D = serializers.IntegerField(required=False, min_value=2)
    V = serializers.IntegerField(required=False, min_value=1)
    G = serializers.IntegerField(required=False, min_value=1)
    alpha = serializers.FloatField(required=False, min_value=0.0)
    beta = serializers.FloatField(required=False, min_value=0.0)
    seed = serializers.IntegerField(required=False, min_value=0)

    rho_dbm = serializers.FloatField(required=False, write_only=True)
    rho_p_dbm = serializers.FloatField(required=False, write_only=True)
    noise_psd_dbm_per_hz = serializers.FloatField(required=False, write_only=True)
    bandwidth_hz = serializers.FloatField(required=False, write_only=True, min_value=1.0)

    def validate(self, data):
        for linear, dbm in (('rho', 'rho_dbm'), ('rho_p', 'rho_p_dbm'), ('sigma_n2', 'noise_psd_dbm_per_hz')):
            if linear in data and dbm in data:
                raise serializers.ValidationError({dbm: f"Give either {linear} or {dbm}, not both"})

        fields = {key: value for key, value in data.items()
                  if key not in ('rho_dbm', 'rho_p_dbm', 'noise_psd_dbm_per_hz', 'bandwidth_hz')}
        if 'rho_dbm' in data:
            fields['rho'] = dbm_to_mw(data['rho_dbm'])
        if 'rho_p_dbm' in data:
            fields['rho_p'] = dbm_to_mw(data['rho_p_dbm'])
        if 'noise_psd_dbm_per_hz' in data:
            K = fields.get('K', SystemConfig.K)
            fields['sigma_n2'] = noise_power_from_psd(
                data['noise_psd_dbm_per_hz'],
                data.get('bandwidth_hz', DEFAULT_BANDWIDTH_HZ),
                K,
            )

        config = SystemConfig(**fields)
        validator = SystemConfigValidator()

        try:
            validator.validate(config)
        except ValidationError as e:
            raise serializers.ValidationError({'system': e.messages})

        return {'config': config}

    def create(self, validated_data):
        return validated_data['config']

"""
Experiment config files.

A config file is a JSON object with optional `system`, `channel`, `dataset`
and `training` sections; anything missing falls back to the defaults of the
matching dataclass.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

from rest_framework import serializers

from channel.generators import ClusterParams
from core.config import SystemConfig, field_names
from trainer.state import TrainingOptions

DEFAULT_NUM_SAMPLES = 4000

# Linear field -> dBm-boundary alternative that a command line override replaces.
_DBM_ALTERNATIVES = {'rho': 'rho_dbm', 'rho_p': 'rho_p_dbm', 'sigma_n2': 'noise_psd_dbm_per_hz'}


class ConfigFileError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    channel: ClusterParams = field(default_factory=ClusterParams)
    num_samples: int = DEFAULT_NUM_SAMPLES
    training: TrainingOptions = field(default_factory=TrainingOptions)

    def replace_system(self, system):
        return ExperimentConfig(system=system, channel=self.channel, num_samples=self.num_samples,
                                training=self.training)


def read_config_file(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigFileError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})")
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path} must hold a JSON object")
    return data


def apply_overrides(data, overrides):
    """Copy of `data` with SystemConfig fields replaced by the non-None `overrides`."""
    system = dict(data.get('system') or {})
    for name in field_names():
        value = overrides.get(name)
        if value is None:
            continue
        system[name] = value
        system.pop(_DBM_ALTERNATIVES.get(name), None)
    return {**data, 'system': system}


def load_experiment_config(path, overrides=None):
    from .serializers import ExperimentConfigSerializer

    data = apply_overrides(read_config_file(path), overrides or {})
    serializer = ExperimentConfigSerializer(data=data)
    if not serializer.is_valid():
        raise serializers.ValidationError(serializer.errors)
    return serializer.save()

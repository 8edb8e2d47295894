from rest_framework import serializers

from channel.generators import ClusterParams
from channel.serializers import ClusterParamsSerializer
from core.config import SystemConfig
from core.serializers import SystemConfigSerializer
from trainer.pipeline import ARCHITECTURES
from trainer.state import TrainingOptions
from .config import ExperimentConfig
from .models import SweepResult, TrainingRun


class DatasetSectionSerializer(serializers.Serializer):
    num_samples = serializers.IntegerField(required=False, min_value=1)


class TrainingSectionSerializer(serializers.Serializer):
    epochs = serializers.IntegerField(required=False, min_value=0)
    batch_size = serializers.IntegerField(required=False, min_value=1)
    lr = serializers.FloatField(required=False)
    architecture = serializers.ChoiceField(choices=sorted(ARCHITECTURES), required=False)
    beta = serializers.FloatField(required=False, min_value=0.0)
    freeze_codebook = serializers.BooleanField(required=False)

    def validate_lr(self, value):
        if not value > 0:
            raise serializers.ValidationError("lr must be positive")
        return value


class ExperimentConfigSerializer(serializers.Serializer):
    system = SystemConfigSerializer(required=False)
    channel = ClusterParamsSerializer(required=False)
    dataset = DatasetSectionSerializer(required=False)
    training = TrainingSectionSerializer(required=False)

    def validate(self, data):
        system = data.get('system', {}).get('config', SystemConfig())
        training = dict(data.get('training', {}))

        # beta is a loss weight, but lives with the other training knobs in config files
        beta = training.pop('beta', None)
        if beta is not None:
            system = system.replace(beta=beta)

        try:
            channel = ClusterParams(**data.get('channel', {}))
        except ValueError as e:
            raise serializers.ValidationError({'channel': [str(e)]})

        return {'config': ExperimentConfig(
            system=system,
            channel=channel,
            num_samples=data.get('dataset', {}).get('num_samples', ExperimentConfig.num_samples),
            training=TrainingOptions(**training),
        )}

    def create(self, validated_data):
        return validated_data['config']


class SweepResultSerializer(serializers.ModelSerializer):
    run = serializers.PrimaryKeyRelatedField(read_only=True)

    class Meta:
        model = SweepResult
        fields = (
            'id',
            'run',
            'axis',
            'axis_value',
            'method',
            'mean_se',
            'stderr',
            'n',
            'csv_path',
            'created_at',
        )


class TrainingRunSerializer(serializers.ModelSerializer):
    results = SweepResultSerializer(many=True, read_only=True)
    status_display = serializers.CharField(source='get_status_display', read_only=True)

    class Meta:
        model = TrainingRun
        fields = (
            'run_id',
            'created_at',
            'architecture',
            'status',
            'status_display',
            'config',
            'config_hash',
            'feedback_bits',
            'epochs',
            'best_val_se',
            'checkpoint_path',
            'history_path',
            'results',
        )

from rest_framework import serializers

from .generators import ClusterParams


class ClusterParamsSerializer(serializers.Serializer):
    num_clusters = serializers.IntegerField(required=False, min_value=1)
    rays_per_cluster = serializers.IntegerField(required=False, min_value=1)
    angle_spread_deg = serializers.FloatField(required=False, min_value=0.0)
    max_delay_s = serializers.FloatField(required=False, min_value=0.0)
    carrier_hz = serializers.FloatField(required=False, min_value=1.0)
    bandwidth_hz = serializers.FloatField(required=False, min_value=1.0)
    path_loss_db = serializers.FloatField(required=False)

    def create(self, validated_data):
        return ClusterParams(**validated_data)

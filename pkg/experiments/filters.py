from django_filters import FilterSet

from .models import SweepResult, TrainingRun


class TrainingRunFilter(FilterSet):
    class Meta:
        model = TrainingRun
        fields = {
            'status': ['exact'],
            'architecture': ['exact'],
            'feedback_bits': ['exact'],
        }


class SweepResultFilter(FilterSet):
    class Meta:
        model = SweepResult
        fields = {
            'method': ['exact', 'in'],
            'axis': ['exact'],
            'axis_value': ['exact', 'gte', 'lte'],
            'run': ['exact'],
        }

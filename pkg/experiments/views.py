from django_filters.rest_framework import DjangoFilterBackend
from rest_framework import filters, generics, serializers
from rest_framework.pagination import LimitOffsetPagination
from rest_framework.response import Response
from rest_framework.views import APIView
from rest_framework.viewsets import ReadOnlyModelViewSet

from baselines.complexity import complexity_table
from core.serializers import SystemConfigSerializer
from .filters import SweepResultFilter, TrainingRunFilter
from .models import SweepResult, TrainingRun
from .serializers import SweepResultSerializer, TrainingRunSerializer


class TrainingRunViewSet(ReadOnlyModelViewSet):
    queryset = TrainingRun.objects.prefetch_related('results')
    serializer_class = TrainingRunSerializer
    pagination_class = None
    filterset_class = TrainingRunFilter
    filter_backends = [DjangoFilterBackend]


class SweepResultList(generics.ListAPIView):
    queryset = SweepResult.objects.select_related('run').all()
    serializer_class = SweepResultSerializer
    filterset_class = SweepResultFilter
    filter_backends = [
        DjangoFilterBackend,
        filters.OrderingFilter,
    ]
    ordering_fields = ['axis_value', 'mean_se']
    ordering = ['axis_value']
    pagination_class = LimitOffsetPagination


class ComplexityTable(APIView):
    """Operation and parameter counts per scheme for the dimensions given as query parameters."""

    def get(self, request, format=None):
        serializer = SystemConfigSerializer(data=request.query_params.dict())
        serializer.is_valid(raise_exception=True)
        iterations = serializers.IntegerField(min_value=1).run_validation(
            request.query_params.get('mo_iterations', 200))
        return Response(complexity_table(serializer.save(), mo_iterations=iterations))

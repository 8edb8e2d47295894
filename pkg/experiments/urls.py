from django.urls import path, include
from rest_framework.routers import DefaultRouter

from experiments import views

router = DefaultRouter()
router.register('runs', views.TrainingRunViewSet)

urlpatterns = [
    path('', include(router.urls)),
    path('results/', views.SweepResultList.as_view()),
    path('complexity/', views.ComplexityTable.as_view()),
]

from django.urls import path

from .views import TrainingRunDetailView, TrainingRunListView

urlpatterns = [
    path('runs/', TrainingRunListView.as_view(), name='run-list'),
    path('runs/<int:run_id>/', TrainingRunDetailView.as_view(), name='run-detail'),
]

from django.urls import path

from .views import ReportDetailView, RunEvaluateView

urlpatterns = [
    path('runs/<int:run_id>/evaluate/', RunEvaluateView.as_view(), name='run-evaluate'),
    path('reports/<int:report_id>/', ReportDetailView.as_view(), name='report-detail'),
]

from django.urls import path

from .views import DatasetListView, DatasetSampleFileView

urlpatterns = [
    path('datasets/', DatasetListView.as_view(), name='dataset-list'),
    path('datasets/<int:dataset_id>/samples/<str:sample_id>/<str:filename>',
         DatasetSampleFileView.as_view(), name='dataset-sample-file'),
]

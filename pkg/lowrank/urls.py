"""
URL configuration for the lowrank app.
"""
from django.urls import path
from . import views

app_name = 'lowrank'

urlpatterns = [
    # Stored experiment runs
    path('api/runs', views.run_list, name='run_list'),
    path('api/runs/<int:run_id>', views.run_detail, name='run_detail'),
    path('api/runs/<int:run_id>/summary', views.run_summary, name='run_summary'),
    path('api/runs/<int:run_id>/plotdata', views.run_plotdata, name='run_plotdata'),

    # Synchronous solve of a small matrix
    path('api/solve', views.solve_matrix, name='solve'),
]

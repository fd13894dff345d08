"""
URL configuration for rb_stability project.

Only the admin is served; recorded experiment runs are browsed there.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]

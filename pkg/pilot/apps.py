from django.apps import AppConfig


class PilotConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'pilot'

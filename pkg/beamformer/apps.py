from django.apps import AppConfig


class BeamformerConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'beamformer'

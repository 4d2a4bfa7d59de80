from django.apps import AppConfig


class SynthdataConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'synthdata'

    def ready(self):
        from . import signals

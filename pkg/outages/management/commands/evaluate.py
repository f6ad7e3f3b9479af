"""
Evalúa cada modelo entrenado sobre el evento reservado (MAPE y R²).

Uso:
    python manage.py evaluate
"""
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Predice hora por hora el evento reservado y escribe un reporte por modelo'
    stage = 'evaluate'

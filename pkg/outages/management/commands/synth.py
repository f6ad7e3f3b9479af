"""
Genera un conjunto de datos sintético reproducible (cinco CSV + config.json).

Uso:
    python manage.py synth --counties 5 --hours 2000 --seed 7
"""
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Genera datos sintéticos de cortes, clima, censo, infraestructura y tormentas'
    stage = 'synth'

    def add_stage_arguments(self, parser):
        parser.add_argument('--counties', type=int, default=5, help='Cantidad de condados (default: 5)')
        parser.add_argument('--hours', type=int, default=2000, help='Horas del horizonte (default: 2000)')

    def stage_options(self, options):
        return {'counties': options['counties'], 'hours': options['hours']}

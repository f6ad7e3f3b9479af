"""
Arma la matriz de entrenamiento, la del evento reservado y el grafo espacio-temporal.

Uso:
    python manage.py features --lags 24 --radius 50
"""
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Construye las matrices de variables y exporta el grafo de condados'
    stage = 'features'

    def add_stage_arguments(self, parser):
        parser.add_argument('--lags', type=int, help='Horas de rezago n (default: 24)')
        parser.add_argument('--radius', type=float, help='Radio de vecindad en millas (default: 50)')

    def stage_overrides(self, options):
        return {'lag': {'n': options.get('lags')}, 'graph': {'radius_miles': options.get('radius')}}

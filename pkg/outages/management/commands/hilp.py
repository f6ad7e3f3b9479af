"""
Selecciona horas semilla de alto impacto y sus análogos climáticos.

Uso:
    python manage.py hilp --alpha 0.7 --analogs-per-seed 10 --season-window 1
"""
from outages.hilp import AGGREGATIONS
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Construye el conjunto de eventos extremos (semillas + análogos)'
    stage = 'hilp'

    def add_stage_arguments(self, parser):
        parser.add_argument('--alpha', type=float, help='Cuantil de cortes en horas de tormenta (default: 0.7)')
        parser.add_argument('--analogs-per-seed', dest='analogs_per_seed', type=int,
                            help='Análogos por semilla (default: 10)')
        parser.add_argument('--season-window', dest='season_window', type=int,
                            help='Ventana estacional en meses (default: 1)')
        parser.add_argument('--aggregation', choices=AGGREGATIONS, help='Agregación del clima (default: hourly)')

    def stage_overrides(self, options):
        return {'hilp': {
            'alpha': options.get('alpha'),
            'analogs_per_seed': options.get('analogs_per_seed'),
            'season_window': options.get('season_window'),
            'aggregation': options.get('aggregation'),
        }}

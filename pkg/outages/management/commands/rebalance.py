"""
Rebalancea la matriz de entrenamiento con SMOGN.

Uso:
    python manage.py rebalance --tau 380 --k 5 --oversample 1 --undersample 0.5 --noise 0.02 --seed 7
"""
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Sobremuestrea casos de alto impacto y submuestrea los de bajo impacto'
    stage = 'rebalance'

    def add_stage_arguments(self, parser):
        parser.add_argument('--tau', type=float, help='Umbral de alto impacto (default: 380)')
        parser.add_argument('--k', type=int, help='Vecinos de alto impacto (default: 5)')
        parser.add_argument('--oversample', type=int, help='Sintéticos por caso de alto impacto (default: 1)')
        parser.add_argument('--undersample', type=float, help='Fracción de bajo impacto conservada (default: 0.5)')
        parser.add_argument('--noise', type=float, help='Ruido gaussiano relativo (default: 0.02)')

    def stage_overrides(self, options):
        bloque = {
            'tau': options.get('tau'),
            'k': options.get('k'),
            'oversample': options.get('oversample'),
            'undersample': options.get('undersample'),
            'noise': options.get('noise'),
            # --seed también fija la semilla propia del rebalanceo
            'seed': options.get('seed'),
        }
        return {'rebalance': bloque}

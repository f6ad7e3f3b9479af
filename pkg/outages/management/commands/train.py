"""
Entrena los modelos configurados (forest, adaboost, lstm) sobre la matriz rebalanceada.

Uso:
    python manage.py train --models forest adaboost
"""
from outages.estimators import MODEL_KINDS
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Entrena los modelos y los guarda como JSON'
    stage = 'train'

    def add_stage_arguments(self, parser):
        parser.add_argument('--models', nargs='+', choices=MODEL_KINDS, help='Modelos a entrenar (default: todos)')
        parser.add_argument('--epochs', type=int, help='Épocas de la LSTM')

    def stage_overrides(self, options):
        return {'models': {'kinds': options.get('models'), 'lstm': {'epochs': options.get('epochs')}}}

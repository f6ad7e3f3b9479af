"""
Imputa las celdas faltantes del panel con los k condados más cercanos.

Uso:
    python manage.py impute --k 5
    python manage.py impute --k 3 --impute-targets
    python manage.py impute --impute-targets=false
"""
from outages.management.base import PipelineCommand, parse_bool


class Command(PipelineCommand):
    help = 'Llena celdas de clima faltantes (y opcionalmente de cortes) con el promedio de vecinos'
    stage = 'impute'

    def add_stage_arguments(self, parser):
        parser.add_argument('--k', type=int, help='Vecinos más cercanos (default: 5)')
        parser.add_argument(
            '--impute-targets',
            dest='impute_targets',
            type=parse_bool,
            nargs='?',
            const=True,
            default=None,
            help='Imputar también la serie de cortes (true/false)',
        )

    def stage_overrides(self, options):
        return {'impute': {'k': options.get('k'), 'impute_targets': options.get('impute_targets')}}

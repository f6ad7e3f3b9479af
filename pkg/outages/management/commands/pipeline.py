"""
Ejecuta un rango contiguo de etapas en orden.

Uso:
    python manage.py pipeline --seed 7
    python manage.py pipeline --from ingest --to evaluate --config config.json
"""
from outages.management.base import PipelineCommand
from outages.pipeline import STAGE_ORDER, stage_range


class Command(PipelineCommand):
    help = 'Corre las etapas synth → report (o el rango indicado)'
    stage = 'pipeline'

    def add_stage_arguments(self, parser):
        parser.add_argument('--from', dest='from_stage', choices=STAGE_ORDER, help='Primera etapa (default: synth)')
        parser.add_argument('--to', dest='to_stage', choices=STAGE_ORDER, help='Última etapa (default: report)')
        parser.add_argument('--counties', type=int, default=5, help='Condados del sintético (default: 5)')
        parser.add_argument('--hours', type=int, default=2000, help='Horas del sintético (default: 2000)')

    def stage_options(self, options):
        return {'counties': options.get('counties'), 'hours': options.get('hours')}

    def execute_stages(self, options):
        etapas = stage_range(options.get('from_stage'), options.get('to_stage'))
        self.stdout.write(self.style.SUCCESS('=' * 60))
        self.stdout.write(self.style.SUCCESS(f'🚀 Pipeline: {" → ".join(etapas)}'))
        self.stdout.write(self.style.SUCCESS('=' * 60))
        for etapa in etapas:
            # El contexto se rearma en cada etapa: synth deja un config.json nuevo
            self.run_one(etapa, options)
        self.stdout.write(self.style.SUCCESS(f'\n🏁 Pipeline completado ({len(etapas)} etapas)'))

"""
Comando base de las etapas del pipeline.

Agrega los flags globales (--config, --seed, --out-dir), arma el StageContext y
traduce errores a códigos de salida: 1 para errores de usuario (PipelineError),
2 para cualquier otro.
"""
import argparse
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import PipelineError
from outages.pipeline import StageContext, run_stage
from outages.serializers import load_pipeline_config

logger = logging.getLogger('outages.commands')

SYNTH_CONFIG = Path('synth') / 'config.json'
TRUE_VALUES = ('1', 'true', 'yes', 'on')
FALSE_VALUES = ('0', 'false', 'no', 'off')


def parse_bool(valor):
    """Flag booleano explícito: --flag, --flag=true o --flag=false."""
    texto = str(valor).strip().lower()
    if texto in TRUE_VALUES:
        return True
    if texto in FALSE_VALUES:
        return False
    raise argparse.ArgumentTypeError(f'expected a boolean value, got {valor!r}')


class PipelineCommand(BaseCommand):
    stage = None

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Archivo JSON de configuración del pipeline')
        parser.add_argument('--seed', type=int, help='Semilla global (prioridad sobre el archivo de configuración)')
        parser.add_argument('--out-dir', dest='out_dir', help='Directorio raíz de artefactos')
        self.add_stage_arguments(parser)

    def add_stage_arguments(self, parser):
        """Flags propios de la etapa."""

    def stage_overrides(self, options):
        """Flags de la etapa expresados como bloque de configuración."""
        return {}

    def stage_options(self, options):
        """Opciones que no forman parte de la configuración (ej. tamaño del sintético)."""
        return {}

    def config_path(self, options, stage):
        if options.get('config'):
            return options['config']
        if stage == 'synth':
            return None
        out_dir = Path(options.get('out_dir') or settings.OUTAGE_PIPELINE['out_dir'])
        candidato = out_dir / SYNTH_CONFIG
        return candidato if candidato.exists() else None

    def build_context(self, options, stage=None) -> StageContext:
        stage = stage or self.stage
        overrides = {'seed': options.get('seed'), 'out_dir': options.get('out_dir')}
        overrides.update(self.stage_overrides(options))
        cfg = load_pipeline_config(self.config_path(options, stage), overrides)
        return StageContext(cfg, Path(cfg['out_dir']).resolve(), self.stage_options(options))

    def run_one(self, stage, options):
        ctx = self.build_context(options, stage)
        self.stdout.write(self.style.NOTICE(f'▶️  Etapa {stage} (semilla {ctx.seed})'))
        resultado = run_stage(stage, ctx)
        for ruta in resultado['outputs']:
            self.stdout.write(f'   - {ruta}')
        self.stdout.write(self.style.SUCCESS(f'✅ {stage} completada: {len(resultado["outputs"])} artefactos'))
        return resultado

    def execute_stages(self, options):
        return self.run_one(self.stage, options)

    def handle(self, *args, **options):
        try:
            self.execute_stages(options)
        except PipelineError as exc:
            self.stdout.write(self.style.ERROR(f'❌ {exc}'))
            raise CommandError(str(exc), returncode=1) from exc
        except CommandError:
            raise
        except Exception as exc:
            logger.exception('Error interno en la etapa %s', self.stage)
            raise CommandError(f'internal error: {exc}', returncode=2) from exc

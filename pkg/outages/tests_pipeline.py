import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from core.artifacts import read_json
from core.exceptions import ConfigError

from .management.commands.impute import Command as ImputeCommand
from .pipeline import STAGE_ORDER, stage_range
from .serializers import DEFAULT_CONFIG, load_pipeline_config


def archivos_de(directorio, excluir=('.xlsx', '.pdf')):
    """Mapa ruta relativa → bytes de todos los artefactos de una corrida."""
    directorio = Path(directorio)
    return {
        p.relative_to(directorio).as_posix(): p.read_bytes()
        for p in sorted(directorio.rglob('*')) if p.is_file() and p.suffix not in excluir
    }


class ConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = load_pipeline_config()
        self.assertEqual(cfg['hilp']['alpha'], 0.7)
        self.assertEqual(cfg['rebalance']['tau'], 380.0)
        self.assertEqual(cfg['models']['kinds'], DEFAULT_CONFIG['models']['kinds'])
        self.assertIsNone(cfg['holdout'])

    def test_flags_win_over_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            ruta = Path(tmp) / 'config.json'
            ruta.write_text(json.dumps({'seed': 3, 'hilp': {'alpha': 0.8}}), encoding='utf-8')
            cfg = load_pipeline_config(ruta, {'seed': 9, 'hilp': {'alpha': None}})
        self.assertEqual(cfg['seed'], 9)
        self.assertEqual(cfg['hilp']['alpha'], 0.8)
        self.assertEqual(cfg['hilp']['analogs_per_seed'], 10)

    def test_relative_inputs_resolve_against_config_dir(self):
        with tempfile.TemporaryDirectory() as tmp:
            ruta = Path(tmp) / 'config.json'
            ruta.write_text(json.dumps({'inputs': {n: f'{n}.csv' for n in (
                'outages', 'weather', 'census', 'infrastructure', 'storms')}}), encoding='utf-8')
            cfg = load_pipeline_config(ruta)
            self.assertEqual(Path(cfg['inputs']['storms']), (Path(tmp) / 'storms.csv').resolve())

    def test_invalid_values_name_the_field(self):
        with self.assertRaises(ConfigError) as ctx:
            load_pipeline_config(overrides={'hilp': {'alpha': 1.5}})
        self.assertIn('hilp.alpha', str(ctx.exception))
        with self.assertRaises(ConfigError):
            load_pipeline_config(overrides={'rebalance': {'undersample': 0}})

    def test_missing_or_broken_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                load_pipeline_config(Path(tmp) / 'nada.json')
            roto = Path(tmp) / 'roto.json'
            roto.write_text('{seed: 1', encoding='utf-8')
            with self.assertRaises(ConfigError):
                load_pipeline_config(roto)

    def test_stage_range(self):
        self.assertEqual(stage_range(), STAGE_ORDER)
        self.assertEqual(stage_range('train', 'report'), ('train', 'evaluate', 'report'))
        with self.assertRaises(ConfigError):
            stage_range('report', 'ingest')


class CommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _correr(self, nombre, out_dir=None, **opciones):
        call_command(nombre, out_dir=str(out_dir or self.out), stdout=StringIO(), **opciones)

    def test_synth_is_byte_identical_for_a_seed(self):
        self._correr('synth', self.out / 'a', counties=3, hours=240, seed=4)
        self._correr('synth', self.out / 'b', counties=3, hours=240, seed=4)
        a, b = archivos_de(self.out / 'a'), archivos_de(self.out / 'b')
        self.assertIn('synth/manifest.json', a)
        self.assertEqual(a, b)

    def test_synth_config_reserves_holdout(self):
        self._correr('synth', counties=3, hours=240, seed=1)
        cfg = read_json(self.out / 'synth' / 'config.json')
        self.assertEqual(cfg['holdout']['county_id'], '26001')
        self.assertEqual(cfg['inputs']['outages'], 'outages.csv')

    def test_evaluate_before_train(self):
        with self.assertRaises(CommandError) as ctx:
            self._correr('evaluate')
        self.assertIn('run train first', str(ctx.exception))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_tampered_artifact_is_detected(self):
        self._correr('synth', counties=3, hours=240, seed=2)
        self._correr('ingest')
        panel = self.out / 'ingest' / 'panel.csv'
        panel.write_bytes(panel.read_bytes().replace(b'present', b'missing', 1))
        with self.assertRaises(CommandError) as ctx:
            self._correr('impute')
        self.assertIn('artifact modified', str(ctx.exception))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_config_errors_exit_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            self._correr('ingest', config=str(self.out / 'no-existe.json'))
        self.assertEqual(ctx.exception.returncode, 1)
        with self.assertRaises(CommandError) as ctx:
            self._correr('synth', counties=1, hours=240)
        self.assertEqual(ctx.exception.returncode, 1)


@tag('slow')
class EndToEndTests(SimpleTestCase):
    def _config_pequena(self, out):
        synth = out / 'synth'
        cfg = read_json(synth / 'config.json')
        cfg['inputs'] = {nombre: str(synth / archivo) for nombre, archivo in cfg['inputs'].items()}
        cfg['lag'] = {'n': 6, 'include_current_weather': True}
        cfg['models'] = {
            'forest': {'n_estimators': 5},
            'adaboost': {'n_estimators': 10},
            'lstm': {'hidden_units': 4, 'epochs': 2, 'batch_size': 16},
        }
        ruta = out / 'small.json'
        ruta.write_text(json.dumps(cfg), encoding='utf-8')
        return ruta

    def _corrida(self, out):
        call_command('synth', out_dir=str(out), counties=3, hours=240, seed=5, stdout=StringIO())
        call_command('pipeline', from_stage='ingest', config=str(self._config_pequena(out)),
                     out_dir=str(out), stdout=StringIO())

    def test_full_pipeline_is_reproducible(self):
        with tempfile.TemporaryDirectory() as tmp:
            a, b = Path(tmp) / 'a', Path(tmp) / 'b'
            self._corrida(a)
            self._corrida(b)

            artefactos_a = archivos_de(a)
            artefactos_a.pop('small.json')
            artefactos_b = archivos_de(b)
            artefactos_b.pop('small.json')
            self.assertEqual(sorted(artefactos_a), sorted(artefactos_b))
            for ruta, contenido in artefactos_a.items():
                self.assertEqual(contenido, artefactos_b[ruta], ruta)

            for kind in ('forest', 'adaboost', 'lstm'):
                reporte = read_json(a / 'evaluate' / f'report_{kind}.json')
                self.assertTrue(math.isfinite(reporte['mape_pct']), kind)
                self.assertTrue(math.isfinite(reporte['r2_pct']), kind)
            self.assertTrue((a / 'report' / 'reporte.xlsx').exists())
            self.assertTrue((a / 'report' / 'reporte.pdf').exists())

            holdout = read_json(a / 'synth' / 'config.json')['holdout']
            inicio, fin = pd.Timestamp(holdout['start']), pd.Timestamp(holdout['end']) + pd.Timedelta(hours=6)
            entrenamiento = pd.read_csv(a / 'rebalance' / 'train_balanced.csv', usecols=['timestamp_utc'])
            horas = pd.to_datetime(entrenamiento['timestamp_utc'], utc=True)
            self.assertFalse(((horas >= inicio) & (horas <= fin)).any())


class BooleanFlagTests(SimpleTestCase):
    def setUp(self):
        self.parser = ImputeCommand().create_parser('manage.py', 'impute')

    def test_explicit_values(self):
        self.assertIs(self.parser.parse_args(['--impute-targets=false']).impute_targets, False)
        self.assertIs(self.parser.parse_args(['--impute-targets=True']).impute_targets, True)
        self.assertIs(self.parser.parse_args(['--impute-targets']).impute_targets, True)
        self.assertIsNone(self.parser.parse_args([]).impute_targets)

    def test_invalid_value(self):
        with self.assertRaises(CommandError):
            self.parser.parse_args(['--impute-targets=quizas'])

    def test_false_reaches_the_stage(self):
        with tempfile.TemporaryDirectory() as tmp:
            call_command('synth', out_dir=tmp, counties=3, hours=240, seed=3, stdout=StringIO())
            call_command('ingest', out_dir=tmp, stdout=StringIO())
            call_command('impute', '--impute-targets=false', out_dir=tmp, stdout=StringIO())
            self.assertTrue((Path(tmp) / 'impute' / 'panel.csv').exists())

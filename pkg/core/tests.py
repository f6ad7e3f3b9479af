import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from .artifacts import (
    MANIFEST_NAME, config_hash, dumps_canonical, read_json, require_artifacts, sha256_file, verify_stage,
    write_manifest,
)
from .exceptions import ArtifactIntegrityError, DataValidationError, StageOrderError, UnknownCountyError


class ManifestTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.base = Path(self.tmp.name)
        self.stage_dir = self.base / 'ingest'
        self.stage_dir.mkdir()
        self.salida = self.stage_dir / 'panel.csv'
        self.salida.write_text('county_id,timestamp_utc\n26001,2020-01-01T00:00:00Z\n', encoding='utf-8')

    def tearDown(self):
        self.tmp.cleanup()

    def _escribir(self, documentos=()):
        return write_manifest(self.stage_dir, 'ingest', '1', 'abc', 0, [], [self.salida], self.base, documentos)

    def test_manifest_has_relative_paths_and_no_timestamps(self):
        manifest = read_json(self._escribir())
        self.assertEqual(manifest['outputs'], {'ingest/panel.csv': sha256_file(self.salida)})
        self.assertEqual(
            sorted(manifest), ['config_hash', 'documents', 'inputs', 'outputs', 'seed', 'stage', 'version'],
        )

    def test_manifest_is_byte_identical_on_rewrite(self):
        primero = self._escribir().read_bytes()
        segundo = self._escribir().read_bytes()
        self.assertEqual(primero, segundo)

    def test_documents_listed_without_hash(self):
        pdf = self.stage_dir / 'reporte.pdf'
        pdf.write_bytes(b'%PDF-1.4')
        manifest = read_json(self._escribir([pdf]))
        self.assertEqual(manifest['documents'], ['ingest/reporte.pdf'])
        self.assertNotIn('ingest/reporte.pdf', manifest['outputs'])

    def test_verify_detects_tampering(self):
        self._escribir()
        verify_stage(self.stage_dir, 'ingest', self.base)
        self.salida.write_text('county_id,timestamp_utc\n26001,2021-01-01T00:00:00Z\n', encoding='utf-8')
        with self.assertRaises(ArtifactIntegrityError):
            verify_stage(self.stage_dir, 'ingest', self.base)

    def test_missing_manifest_means_stage_not_run(self):
        (self.stage_dir / MANIFEST_NAME).unlink(missing_ok=True)
        with self.assertRaises(StageOrderError) as ctx:
            verify_stage(self.stage_dir, 'ingest', self.base)
        self.assertIn('run ingest first', str(ctx.exception))

    def test_require_artifacts(self):
        with self.assertRaises(StageOrderError) as ctx:
            require_artifacts('train', [self.base / 'train' / 'forest.json'])
        self.assertEqual(str(ctx.exception), 'run train first (missing forest.json)')


class ConfigHashTests(SimpleTestCase):
    def test_key_order_does_not_matter(self):
        self.assertEqual(config_hash({'a': 1, 'b': {'c': 2}}), config_hash({'b': {'c': 2}, 'a': 1}))
        self.assertNotEqual(config_hash({'a': 1}), config_hash({'a': 2}))

    def test_canonical_json(self):
        self.assertEqual(dumps_canonical({'b': 1, 'a': 'ñ'}), '{\n  "a": "ñ",\n  "b": 1\n}\n')


class ExceptionMessageTests(SimpleTestCase):
    def test_validation_error_names_location(self):
        exc = DataValidationError('negative count', row=4, field='customers_out', path='outages.csv')
        self.assertEqual(str(exc), '[outages.csv, row 4, field customers_out] negative count')

    def test_unknown_counties_sorted_and_unique(self):
        exc = UnknownCountyError(['26003', '26001', '26003'])
        self.assertEqual(exc.county_ids, ['26001', '26003'])
        self.assertEqual(str(exc), 'unknown county_id(s): 26001, 26003')

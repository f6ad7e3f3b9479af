import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.exceptions import DataValidationError, UnknownCountyError

from .ingest import (
    CensusRecord, CellState, OutageRecord, WeatherRecord, build_county_statics, build_panel,
    normalize_infrastructure, parse_outage_csv, parse_storm_events_csv, parse_weather_csv, read_panel_csv,
    resample_outages_hourly, write_panel_csv,
)
from .testing import make_panel, make_statics


class IngestCsvTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _escribir(self, nombre, texto):
        ruta = self.dir / nombre
        ruta.write_text(texto, encoding='utf-8')
        return ruta

    def test_single_outage_row(self):
        ruta = self._escribir('outages.csv', 'county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:15:00Z,1200\n')
        registros = parse_outage_csv(ruta)
        self.assertEqual(len(registros), 1)
        self.assertEqual(registros[0].customers_out, 1200)
        self.assertEqual(registros[0].timestamp, pd.Timestamp('2020-06-06T14:15:00Z'))

    def test_header_only_is_empty(self):
        ruta = self._escribir('outages.csv', 'county_id,timestamp_utc,customers_out\n')
        self.assertEqual(parse_outage_csv(ruta), [])

    def test_negative_count_names_row_and_field(self):
        ruta = self._escribir('outages.csv', 'county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:15:00Z,-5\n')
        with self.assertRaises(DataValidationError) as ctx:
            parse_outage_csv(ruta)
        self.assertEqual(ctx.exception.row, 2)
        self.assertEqual(ctx.exception.field, 'customers_out')

    def test_malformed_timestamp_and_duplicates(self):
        ruta = self._escribir(
            'outages.csv',
            'county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:15:00Z,1\n26163,ayer,2\n',
        )
        with self.assertRaises(DataValidationError) as ctx:
            parse_outage_csv(ruta)
        self.assertEqual(ctx.exception.row, 3)
        self.assertEqual(ctx.exception.field, 'timestamp_utc')

        ruta = self._escribir(
            'dup.csv',
            'county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:15:00Z,1\n26163,2020-06-06T14:15:00Z,2\n',
        )
        with self.assertRaises(DataValidationError) as ctx:
            parse_outage_csv(ruta)
        self.assertEqual(ctx.exception.row, 3)

    def test_records_sorted_by_county_and_time(self):
        ruta = self._escribir(
            'outages.csv',
            'county_id,timestamp_utc,customers_out\n'
            '26163,2020-06-06T15:00:00Z,3\n26099,2020-06-06T14:00:00Z,2\n26163,2020-06-06T14:00:00Z,1\n',
        )
        claves = [(r.county_id, r.timestamp.hour) for r in parse_outage_csv(ruta)]
        self.assertEqual(claves, [('26099', 14), ('26163', 14), ('26163', 15)])

    def test_weather_empty_cell_is_missing(self):
        ruta = self._escribir(
            'weather.csv',
            'county_id,timestamp_utc,temp_f,precip_in,wind_kmh,gust_kmh,swr_wm2,rh_pct,cloud_pct,pressure_hpa\n'
            '26163,2020-06-06T14:00:00Z,70.5,,12,20,300,55,40,1010\n',
        )
        registro = parse_weather_csv(ruta)[0]
        self.assertEqual(registro.temperature, 70.5)
        self.assertIsNone(registro.precipitation)

    def test_storm_start_after_end(self):
        ruta = self._escribir(
            'storms.csv',
            'county_id,start_utc,end_utc,event_type\n26163,2020-06-06T14:00:00Z,2020-06-06T10:00:00Z,Flood\n',
        )
        with self.assertRaises(DataValidationError):
            parse_storm_events_csv(ruta)


class ResampleTests(SimpleTestCase):
    def _registros(self, valores, inicio='2020-06-06T14:00:00Z'):
        base = pd.Timestamp(inicio)
        return [OutageRecord('A', base + pd.Timedelta(minutes=15 * i), v) for i, v in enumerate(valores)]

    def test_hour_takes_maximum_quarter(self):
        serie = resample_outages_hourly(self._registros([100, 250, 180, 90]))['A']
        self.assertEqual(int(serie.iloc[0]), 250)

    def test_single_reading_and_gap(self):
        registros = self._registros([7]) + [OutageRecord('A', pd.Timestamp('2020-06-06T16:00:00Z'), 3)]
        serie = resample_outages_hourly(registros)['A']
        self.assertEqual(int(serie.iloc[0]), 7)
        self.assertTrue(pd.isna(serie.iloc[1]))
        self.assertEqual(int(serie.iloc[2]), 3)

    def test_idempotent_on_hourly_maxima(self):
        base = pd.Timestamp('2020-06-06T00:00:00Z')
        registros = [OutageRecord('A', base + pd.Timedelta(hours=h), v) for h, v in enumerate([5, 9, 2])]
        serie = resample_outages_hourly(registros)['A']
        self.assertEqual(serie.astype(int).tolist(), [5, 9, 2])


class StaticsTests(SimpleTestCase):
    def test_tower_shares(self):
        shares = normalize_infrastructure({'A': {'towers': 30}, 'B': {'towers': 70}})
        self.assertAlmostEqual(shares['A']['towers'], 0.3)
        self.assertAlmostEqual(shares['B']['towers'], 0.7)

    def test_single_county_gets_full_share(self):
        shares = normalize_infrastructure({'A': {'poles': 4, 'lines': 9}})
        self.assertEqual(shares['A'], {'poles': 1.0, 'lines': 1.0})

    def test_zero_column_is_rejected(self):
        with self.assertRaises(DataValidationError) as ctx:
            normalize_infrastructure({'A': {'substations': 0}, 'B': {'substations': 0}})
        self.assertIn('zero column: substations', str(ctx.exception))

    def test_shares_sum_to_one(self):
        rng = np.random.default_rng(3)
        conteos = {f'C{i}': {'poles': int(rng.integers(1, 1000)), 'towers': int(rng.integers(0, 50))}
                   for i in range(12)}
        conteos['C0']['towers'] = 1
        shares = normalize_infrastructure(conteos)
        for cat in ('poles', 'towers'):
            self.assertAlmostEqual(sum(s[cat] for s in shares.values()), 1.0, delta=1e-9)

    def test_county_in_only_one_file(self):
        censo = [CensusRecord('A', 42.0, -83.0, 50000.0, 5.0, (0.2, 0.5, 0.3))]
        with self.assertRaises(UnknownCountyError):
            build_county_statics(censo, {'A': {'poles': 1}, 'B': {'poles': 2}})


class BuildPanelTests(SimpleTestCase):
    def setUp(self):
        self.statics = make_statics([(42.0, -83.0), (42.5, -83.5)], ids=['A', 'B'])
        self.inicio = pd.Timestamp('2020-01-01T00:00:00Z')
        self.horas = pd.date_range(self.inicio, periods=48, freq='h')

    def _clima(self, omitir=()):
        registros = []
        for c in ('A', 'B'):
            for i, t in enumerate(self.horas):
                valores = [float(i)] * 8
                if (c, i) in omitir:
                    valores[0] = None
                registros.append(WeatherRecord(c, t, *valores))
        return registros

    def _cortes(self):
        return {c: pd.Series(np.arange(48), index=self.horas).astype('Int64') for c in ('A', 'B')}

    def test_complete_panel(self):
        panel = build_panel(self._cortes(), self._clima(), self.statics, (self.inicio, self.horas[-1] + pd.Timedelta(hours=1)))
        self.assertEqual(panel.cell_count, 96)
        self.assertEqual(panel.missing_weather_count(), 0)
        self.assertEqual(panel.missing_outage_count(), 0)

    def test_single_weather_gap(self):
        panel = build_panel(self._cortes(), self._clima(omitir={('B', 10)}), self.statics,
                            (self.inicio, self.horas[-1] + pd.Timedelta(hours=1)))
        self.assertEqual(panel.missing_weather_count(), 1)
        self.assertEqual(panel.weather_state[1, 10, 0], CellState.MISSING)

    def test_unknown_county(self):
        cortes = {'99999': pd.Series([1], index=self.horas[:1]).astype('Int64')}
        with self.assertRaises(UnknownCountyError) as ctx:
            build_panel(cortes, [], self.statics, (self.inicio, self.horas[-1]))
        self.assertIn('99999', str(ctx.exception))

    def test_panel_csv_round_trip_is_bitwise(self):
        panel = make_panel(n_counties=3, n_hours=30, seed=5, missing_weather=0.1, missing_outages=0.05)
        with tempfile.TemporaryDirectory() as tmp:
            ruta = write_panel_csv(panel, Path(tmp) / 'panel.csv')
            leido = read_panel_csv(ruta, panel.statics.values())
        self.assertTrue(panel.equals(leido))

"""
Etapas del pipeline y su registro.

Cada etapa verifica los manifests de las etapas de las que depende, lee sus
artefactos, escribe los propios bajo `<out_dir>/<etapa>/` y cierra con un
manifest.json (hash de configuración, semilla, versión, hashes de entradas y
salidas). Orden:

    synth → ingest → impute → hilp → features → rebalance → train → evaluate → report
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from core.artifacts import config_hash, read_json, verify_stage, write_json, write_manifest
from core.exceptions import ConfigError, PipelineError

from .estimators import TrainConfig, forest_importance, load_model, save_model, train_model
from .evaluation import EvalReport, emit_plot_data, evaluate_event
from .export_utils import export_report_excel, export_report_pdf
from .features import (
    LagConfig, build_feature_matrix, build_graph, build_window_matrix, export_graph, manifest_path_for,
    read_feature_matrix, write_feature_matrix,
)
from .hilp import ExtremeEventSet, StandardizationParams, build_extreme_set, fit_standardization
from .impute import impute_panel
from .ingest import (
    _as_utc, build_county_statics, build_panel, parse_census_csv, parse_infrastructure_csv, parse_outage_csv,
    parse_storm_events_csv, parse_weather_csv, read_panel_csv, read_statics_csv, resample_outages_hourly,
    write_panel_csv, write_statics_csv, write_storms_csv,
)
from .rebalance import RebalanceConfig, rebalance_matrix
from .serializers import INPUT_NAMES
from .synthetic import generate_fixture

logger = logging.getLogger(__name__)

STAGE_ORDER = ('synth', 'ingest', 'impute', 'hilp', 'features', 'rebalance', 'train', 'evaluate', 'report')
STAGE_VERSIONS = {stage: '1' for stage in STAGE_ORDER}


@dataclass
class StageContext:
    """Configuración validada y rutas de una corrida."""
    config: dict
    out_dir: Path
    options: dict = field(default_factory=dict)

    @property
    def seed(self):
        return int(self.config['seed'])

    def stage_dir(self, stage):
        return self.out_dir / stage

    def path(self, stage, name):
        return self.out_dir / stage / name

    def config_hash(self):
        # Las rutas quedan fuera del hash: los archivos ya se registran por su SHA-256
        return config_hash({k: v for k, v in self.config.items() if k not in ('out_dir', 'inputs')})

    def verify(self, *stages):
        for stage in stages:
            verify_stage(self.stage_dir(stage), stage, self.out_dir)

    def finish(self, stage, inputs, outputs, documents=()):
        write_manifest(
            self.stage_dir(stage), stage, STAGE_VERSIONS[stage], self.config_hash(), self.seed,
            inputs, outputs, self.out_dir, documents=documents,
        )
        return {'stage': stage, 'outputs': [Path(p) for p in outputs] + [Path(p) for p in documents]}

    @property
    def holdout_window(self):
        holdout = self.config.get('holdout')
        if not holdout:
            return None
        return _as_utc(holdout['start']), _as_utc(holdout['end'])

    @property
    def lag_cfg(self):
        return LagConfig(**self.config['lag'])

    @property
    def utc_offset(self):
        return float(self.config['utc_offset_hours'])


# ======================================
# 🧪 SYNTH
# ======================================
def run_synth(ctx: StageContext):
    counties = int(ctx.options.get('counties') or 5)
    hours = int(ctx.options.get('hours') or 2000)
    fixture = generate_fixture(ctx.stage_dir('synth'), counties=counties, hours=hours, seed=ctx.seed)
    salidas = list(fixture.files.values()) + [fixture.config_path]
    return ctx.finish('synth', [], salidas)


# ======================================
# 📥 INGEST
# ======================================
def _input_paths(ctx):
    inputs = ctx.config.get('inputs')
    if not inputs:
        raise ConfigError('config has no inputs block; run synth first or pass --config')
    rutas = {}
    for nombre in INPUT_NAMES:
        ruta = Path(inputs[nombre])
        if not ruta.exists():
            raise ConfigError(f'input file not found: {nombre}={ruta}')
        rutas[nombre] = ruta
    return rutas


def _time_range(ctx, horarias, clima):
    rango = ctx.config.get('time_range')
    if rango:
        return _as_utc(rango['start']), _as_utc(rango['end'])
    marcas = [w.timestamp for w in clima] + [s.index.min() for s in horarias.values() if len(s)] \
        + [s.index.max() for s in horarias.values() if len(s)]
    if not marcas:
        raise PipelineError('cannot infer the time range: outage and weather inputs are empty')
    return min(marcas), max(marcas) + pd.Timedelta(hours=1)


def run_ingest(ctx: StageContext):
    rutas = _input_paths(ctx)
    synth_dir = ctx.stage_dir('synth').resolve()
    if any(synth_dir in p.resolve().parents for p in rutas.values()):
        ctx.verify('synth')

    horarias = resample_outages_hourly(parse_outage_csv(rutas['outages']))
    clima = parse_weather_csv(rutas['weather'])
    statics = build_county_statics(
        parse_census_csv(rutas['census']), parse_infrastructure_csv(rutas['infrastructure']),
    )
    tormentas = parse_storm_events_csv(rutas['storms'])
    desconocidos = {s.county_id for s in tormentas} - {s.county_id for s in statics}
    if desconocidos:
        logger.warning('Tormentas de condados sin datos estáticos ignoradas: %s', sorted(desconocidos))
        tormentas = [s for s in tormentas if s.county_id not in desconocidos]

    panel = build_panel(horarias, clima, statics, _time_range(ctx, horarias, clima))
    salidas = [
        write_panel_csv(panel, ctx.path('ingest', 'panel.csv')),
        write_statics_csv(statics, ctx.path('ingest', 'statics.csv')),
        write_storms_csv(tormentas, ctx.path('ingest', 'storms.csv')),
    ]
    return ctx.finish('ingest', list(rutas.values()), salidas)


def _read_statics(ctx):
    return read_statics_csv(ctx.path('ingest', 'statics.csv'))


def _read_imputed_panel(ctx):
    return read_panel_csv(ctx.path('impute', 'panel.csv'), _read_statics(ctx))


# ======================================
# 🩹 IMPUTE
# ======================================
def run_impute(ctx: StageContext):
    ctx.verify('ingest')
    entradas = [ctx.path('ingest', 'panel.csv'), ctx.path('ingest', 'statics.csv')]
    panel = read_panel_csv(entradas[0], _read_statics(ctx))
    bloque = ctx.config['impute']
    imputado, resumen = impute_panel(panel, k=bloque['k'], impute_targets=bloque['impute_targets'])
    salidas = [
        write_panel_csv(imputado, ctx.path('impute', 'panel.csv')),
        write_json(ctx.path('impute', 'summary.json'), {
            'k': bloque['k'],
            'impute_targets': bloque['impute_targets'],
            'filled': resumen.as_dict(),
            'total': resumen.total(),
        }),
    ]
    return ctx.finish('impute', entradas, salidas)


# ======================================
# ⛈️ HILP
# ======================================
def run_hilp(ctx: StageContext):
    ctx.verify('ingest', 'impute')
    entradas = [ctx.path('impute', 'panel.csv'), ctx.path('ingest', 'storms.csv')]
    panel = _read_imputed_panel(ctx)
    tormentas = parse_storm_events_csv(entradas[1])
    bloque = ctx.config['hilp']
    params = fit_standardization(panel, bloque['aggregation'], ctx.utc_offset)
    conjunto = build_extreme_set(
        panel, tormentas, alpha=bloque['alpha'], K=bloque['analogs_per_seed'],
        season_window=bloque['season_window'], aggregation=bloque['aggregation'],
        utc_offset_hours=ctx.utc_offset, params=params,
    )
    destino = ctx.path('hilp', 'extreme_set.csv')
    destino.parent.mkdir(parents=True, exist_ok=True)
    conjunto.to_frame().to_csv(destino, index=False, lineterminator='\n')
    datos = params.as_dict()
    datos.update({'alpha': bloque['alpha'], 'quantile': conjunto.quantile, 'aggregation': bloque['aggregation'],
                  'seeds': len(conjunto.seeds), 'rows': len(conjunto.union)})
    salidas = [destino, write_json(ctx.path('hilp', 'standardization.json'), datos)]
    return ctx.finish('hilp', entradas, salidas)


def read_extreme_set(path, standardization_path=None) -> Tuple[ExtremeEventSet, StandardizationParams]:
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    params = None
    quantile = float('nan')
    if standardization_path is not None:
        datos = read_json(standardization_path)
        params = StandardizationParams.from_dict(datos)
        quantile = float(datos.get('quantile', quantile))
    return ExtremeEventSet.from_frame(df, quantile=quantile), params


# ======================================
# 🧮 FEATURES
# ======================================
def run_features(ctx: StageContext):
    ctx.verify('ingest', 'impute', 'hilp')
    entradas = [ctx.path('impute', 'panel.csv'), ctx.path('ingest', 'statics.csv'),
                ctx.path('hilp', 'extreme_set.csv')]
    panel = _read_imputed_panel(ctx)
    conjunto, _ = read_extreme_set(entradas[2])
    ventana = ctx.holdout_window
    matriz = build_feature_matrix(
        panel, conjunto, lag_cfg=ctx.lag_cfg, exclude=ventana, utc_offset_hours=ctx.utc_offset,
    )
    entrenamiento = write_feature_matrix(matriz, ctx.path('features', 'train_matrix.csv'))
    salidas = [entrenamiento, manifest_path_for(entrenamiento)]
    if ventana is not None:
        holdout = ctx.config['holdout']
        evento = build_window_matrix(
            panel, None, ctx.lag_cfg, holdout['county_id'], ventana[0], ventana[1], ctx.utc_offset,
        )
        ruta = write_feature_matrix(evento, ctx.path('features', 'event_matrix.csv'))
        salidas += [ruta, manifest_path_for(ruta)]
    else:
        logger.warning('Sin evento de evaluación configurado: no se genera event_matrix.csv')
    grafo = build_graph(panel, radius_miles=ctx.config['graph']['radius_miles'])
    salidas += list(export_graph(grafo, ctx.stage_dir('features')))
    return ctx.finish('features', entradas, salidas)


# ======================================
# ⚖️ REBALANCE
# ======================================
def rebalance_config(ctx: StageContext) -> RebalanceConfig:
    bloque = ctx.config['rebalance']
    semilla = bloque['seed'] if bloque.get('seed') is not None else ctx.seed
    return RebalanceConfig(
        tau=bloque['tau'], k_neighbors=bloque['k'], oversample_rate=bloque['oversample'],
        undersample_rate=bloque['undersample'], noise_fraction=bloque['noise'], seed=semilla,
    )


def run_rebalance(ctx: StageContext):
    ctx.verify('features')
    origen = ctx.path('features', 'train_matrix.csv')
    matriz = read_feature_matrix(origen)
    cfg = rebalance_config(ctx)
    balanceada, resultado = rebalance_matrix(matriz, cfg)
    destino = write_feature_matrix(balanceada, ctx.path('rebalance', 'train_balanced.csv'))
    resumen = write_json(ctx.path('rebalance', 'summary.json'), {
        'tau': cfg.tau,
        'seed': cfg.seed,
        'rows_in': matriz.n_rows,
        'rows_out': balanceada.n_rows,
        'high': resultado.n_high,
        'low_kept': resultado.n_low_kept,
        'smoter': resultado.n_smoter,
        'gaussian': resultado.n_gaussian,
        'high_fraction_before': float(np.mean(matriz.target >= cfg.tau)),
        'high_fraction_after': float(np.mean(balanceada.target >= cfg.tau)) if balanceada.n_rows else 0.0,
    })
    return ctx.finish('rebalance', [origen, manifest_path_for(origen)],
                      [destino, manifest_path_for(destino), resumen])


# ======================================
# 🏋️ TRAIN
# ======================================
def train_configs(ctx: StageContext) -> List[TrainConfig]:
    modelos = ctx.config['models']
    return [TrainConfig.for_kind(kind, seed=ctx.seed, **modelos[kind]) for kind in modelos['kinds']]


def run_train(ctx: StageContext):
    ctx.verify('rebalance')
    origen = ctx.path('rebalance', 'train_balanced.csv')
    matriz = read_feature_matrix(origen)
    salidas = []
    for cfg in train_configs(ctx):
        logger.info('Entrenando %s sobre %d filas', cfg.kind, matriz.n_rows)
        modelo = train_model(matriz, cfg)
        salidas.append(save_model(modelo, ctx.path('train', f'{cfg.kind}.json')))
    return ctx.finish('train', [origen, manifest_path_for(origen)], salidas)


# ======================================
# 📏 EVALUATE
# ======================================
def _model_paths(ctx):
    return [ctx.path('train', f'{kind}.json') for kind in ctx.config['models']['kinds']]


def run_evaluate(ctx: StageContext):
    ctx.verify('train')
    if ctx.holdout_window is None:
        raise ConfigError('holdout event is not configured; add a holdout block to the config')
    ctx.verify('features')
    origen = ctx.path('features', 'event_matrix.csv')
    if not origen.exists():
        raise PipelineError('event_matrix.csv is missing; re-run features with the holdout configured')
    matriz = read_feature_matrix(origen)
    evento = ctx.config['holdout'].get('event_id', 'holdout')
    salidas = []
    modelos = _model_paths(ctx)
    for ruta in modelos:
        reporte = evaluate_event(load_model(ruta), matriz, event_id=evento)
        salidas.append(reporte.save(ctx.path('evaluate', f'report_{reporte.model_kind}.json')))
    return ctx.finish('evaluate', [origen] + modelos, salidas)


# ======================================
# 📊 REPORT
# ======================================
def _importances(ctx):
    ruta = ctx.path('train', 'forest.json')
    if 'forest' not in ctx.config['models']['kinds'] or not ruta.exists():
        return {}
    return forest_importance(load_model(ruta))


def run_report(ctx: StageContext):
    ctx.verify('train', 'evaluate')
    kinds = ctx.config['models']['kinds']
    entradas = [ctx.path('evaluate', f'report_{kind}.json') for kind in kinds]
    reportes = [EvalReport.load(p) for p in entradas]
    salidas = []
    for reporte in reportes:
        salidas += list(emit_plot_data(reporte, ctx.path('report', f'series_{reporte.model_kind}.csv')))
    importancias = _importances(ctx)
    if importancias:
        entradas.append(ctx.path('train', 'forest.json'))
        salidas += list(emit_plot_data(importancias, ctx.path('report', 'importance.csv')))
    salidas.append(write_json(ctx.path('report', 'summary.json'), {
        'models': [r.metrics() for r in reportes],
    }))
    documentos = [
        export_report_excel(reportes, importancias, ctx.path('report', 'reporte.xlsx')),
        export_report_pdf(reportes, importancias, ctx.path('report', 'reporte.pdf')),
    ]
    return ctx.finish('report', entradas, salidas, documents=documentos)


STAGES: Dict[str, Callable[[StageContext], dict]] = {
    'synth': run_synth,
    'ingest': run_ingest,
    'impute': run_impute,
    'hilp': run_hilp,
    'features': run_features,
    'rebalance': run_rebalance,
    'train': run_train,
    'evaluate': run_evaluate,
    'report': run_report,
}


def stage_range(start=None, end=None):
    """Etapas contiguas entre `start` y `end` (inclusive)."""
    start = start or STAGE_ORDER[0]
    end = end or STAGE_ORDER[-1]
    for nombre in (start, end):
        if nombre not in STAGES:
            raise ConfigError(f'unknown stage: {nombre}')
    i, j = STAGE_ORDER.index(start), STAGE_ORDER.index(end)
    if i > j:
        raise ConfigError(f'stage {start} comes after {end}')
    return STAGE_ORDER[i:j + 1]


def run_stage(stage, ctx: StageContext):
    logger.info('Etapa %s → %s', stage, ctx.stage_dir(stage))
    return STAGES[stage](ctx)

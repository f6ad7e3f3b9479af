"""
Validación del archivo de configuración del pipeline (JSON).

Precedencia: flag de línea de comandos > archivo --config > entorno (.env) > valores por defecto.
"""
import copy
import json
from pathlib import Path

from django.conf import settings
from rest_framework import serializers

from core.exceptions import ConfigError

from .estimators.config import ACTIVATIONS, MODEL_KINDS
from .hilp import AGGREGATIONS

INPUT_NAMES = ('outages', 'weather', 'census', 'infrastructure', 'storms')

DEFAULT_CONFIG = {
    'inputs': None,
    'time_range': None,
    'impute': {'k': 5, 'impute_targets': False},
    'hilp': {'alpha': 0.7, 'analogs_per_seed': 10, 'season_window': 1, 'aggregation': 'hourly'},
    'lag': {'n': 24, 'include_current_weather': True},
    'graph': {'radius_miles': 50.0},
    'rebalance': {'tau': 380.0, 'k': 5, 'oversample': 1, 'undersample': 0.5, 'noise': 0.02, 'seed': None},
    'models': {
        'kinds': list(MODEL_KINDS),
        'forest': {'n_estimators': 100, 'max_depth': None, 'min_samples_leaf': 2, 'bootstrap': True},
        'adaboost': {'n_estimators': 120, 'learning_rate': 0.001, 'max_depth': 3, 'min_samples_leaf': 2},
        'lstm': {'hidden_units': 128, 'epochs': 100, 'learning_rate': 0.001, 'batch_size': 32,
                 'activation': 'standard'},
    },
    'holdout': None,
}


# =====================================================
# 🧩 BLOQUES
# =====================================================
class InputsSerializer(serializers.Serializer):
    outages = serializers.CharField()
    weather = serializers.CharField()
    census = serializers.CharField()
    infrastructure = serializers.CharField()
    storms = serializers.CharField()


class TimeRangeSerializer(serializers.Serializer):
    start = serializers.DateTimeField()
    end = serializers.DateTimeField()

    def validate(self, attrs):
        if attrs['end'] <= attrs['start']:
            raise serializers.ValidationError('El fin del rango debe ser posterior al inicio.')
        return attrs


class ImputeSerializer(serializers.Serializer):
    k = serializers.IntegerField(min_value=1)
    impute_targets = serializers.BooleanField()


class HilpSerializer(serializers.Serializer):
    alpha = serializers.FloatField(min_value=0.0, max_value=1.0)
    analogs_per_seed = serializers.IntegerField(min_value=0)
    season_window = serializers.IntegerField(min_value=0, max_value=6)
    aggregation = serializers.ChoiceField(choices=AGGREGATIONS)


class LagSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1)
    include_current_weather = serializers.BooleanField()


class GraphSerializer(serializers.Serializer):
    radius_miles = serializers.FloatField(min_value=0.0)


class RebalanceSerializer(serializers.Serializer):
    tau = serializers.FloatField()
    k = serializers.IntegerField(min_value=1)
    oversample = serializers.IntegerField(min_value=0)
    undersample = serializers.FloatField()
    noise = serializers.FloatField(min_value=0.0)
    seed = serializers.IntegerField(allow_null=True)

    def validate_tau(self, value):
        if value <= 0:
            raise serializers.ValidationError('tau debe ser mayor que cero.')
        return value

    def validate_undersample(self, value):
        if not 0 < value <= 1:
            raise serializers.ValidationError('undersample debe estar en (0, 1].')
        return value


class ForestSerializer(serializers.Serializer):
    n_estimators = serializers.IntegerField(min_value=1)
    max_depth = serializers.IntegerField(min_value=1, allow_null=True)
    min_samples_leaf = serializers.IntegerField(min_value=1)
    bootstrap = serializers.BooleanField()


class AdaBoostSerializer(serializers.Serializer):
    n_estimators = serializers.IntegerField(min_value=1)
    learning_rate = serializers.FloatField()
    max_depth = serializers.IntegerField(min_value=1, allow_null=True)
    min_samples_leaf = serializers.IntegerField(min_value=1)

    def validate_learning_rate(self, value):
        if value <= 0:
            raise serializers.ValidationError('learning_rate debe ser mayor que cero.')
        return value


class LstmSerializer(serializers.Serializer):
    hidden_units = serializers.IntegerField(min_value=1)
    epochs = serializers.IntegerField(min_value=0)
    learning_rate = serializers.FloatField()
    batch_size = serializers.IntegerField(min_value=1)
    activation = serializers.ChoiceField(choices=ACTIVATIONS)

    def validate_learning_rate(self, value):
        if value <= 0:
            raise serializers.ValidationError('learning_rate debe ser mayor que cero.')
        return value


class ModelsSerializer(serializers.Serializer):
    kinds = serializers.ListField(child=serializers.ChoiceField(choices=MODEL_KINDS), allow_empty=False)
    forest = ForestSerializer()
    adaboost = AdaBoostSerializer()
    lstm = LstmSerializer()


class HoldoutSerializer(serializers.Serializer):
    county_id = serializers.CharField()
    start = serializers.DateTimeField()
    end = serializers.DateTimeField()
    event_id = serializers.CharField(required=False, default='holdout')

    def validate(self, attrs):
        if attrs['end'] < attrs['start']:
            raise serializers.ValidationError('El fin del evento no puede ser anterior al inicio.')
        return attrs


# =====================================================
# 📋 CONFIGURACIÓN COMPLETA
# =====================================================
class PipelineConfigSerializer(serializers.Serializer):
    out_dir = serializers.CharField()
    seed = serializers.IntegerField(min_value=0)
    utc_offset_hours = serializers.FloatField(min_value=-14.0, max_value=14.0)
    inputs = InputsSerializer(required=False, allow_null=True)
    time_range = TimeRangeSerializer(required=False, allow_null=True)
    impute = ImputeSerializer()
    hilp = HilpSerializer()
    lag = LagSerializer()
    graph = GraphSerializer()
    rebalance = RebalanceSerializer()
    models = ModelsSerializer()
    holdout = HoldoutSerializer(required=False, allow_null=True)


def deep_merge(base, override):
    """Mezcla recursiva de diccionarios; `override` gana en cada hoja."""
    resultado = copy.deepcopy(base)
    for clave, valor in (override or {}).items():
        if isinstance(valor, dict) and isinstance(resultado.get(clave), dict):
            resultado[clave] = deep_merge(resultado[clave], valor)
        else:
            resultado[clave] = copy.deepcopy(valor)
    return resultado


def _sin_nulos(datos):
    """Quita las hojas None de los overrides (flags no indicados)."""
    limpio = {}
    for clave, valor in (datos or {}).items():
        if isinstance(valor, dict):
            valor = _sin_nulos(valor)
            if valor:
                limpio[clave] = valor
        elif valor is not None:
            limpio[clave] = valor
    return limpio


def _flatten_errors(errores, prefijo=''):
    for campo, detalle in errores.items():
        ruta = f'{prefijo}{campo}'
        if isinstance(detalle, dict):
            yield from _flatten_errors(detalle, f'{ruta}.')
        else:
            for mensaje in detalle:
                yield f'{ruta}: {mensaje}'


def _resolve_inputs(inputs, base_dir):
    resueltas = {}
    for nombre, ruta in inputs.items():
        ruta = Path(str(ruta))
        resueltas[nombre] = str(ruta if ruta.is_absolute() else (base_dir / ruta).resolve())
    return resueltas


def read_config_file(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f'config file not found: {path}')
    try:
        datos = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ConfigError(f'config file is not valid JSON: {path} ({exc})') from exc
    if not isinstance(datos, dict):
        raise ConfigError('config file must contain a JSON object')
    if isinstance(datos.get('inputs'), dict):
        datos['inputs'] = _resolve_inputs(datos['inputs'], path.resolve().parent)
    return datos


def load_pipeline_config(path=None, overrides=None, base=None):
    """
    Devuelve la configuración validada como dict plano de tipos JSON.
    `base` permite partir de otra configuración ya cargada (ej. la del sintetizador).
    """
    datos = deep_merge(DEFAULT_CONFIG, settings.OUTAGE_PIPELINE)
    if base:
        datos = deep_merge(datos, base)
    if path:
        datos = deep_merge(datos, read_config_file(path))
    datos = deep_merge(datos, _sin_nulos(overrides))

    serializer = PipelineConfigSerializer(data=datos)
    if not serializer.is_valid():
        raise ConfigError('invalid pipeline config: ' + '; '.join(_flatten_errors(serializer.errors)))
    # Se conserva el dict mezclado (tipos JSON) para que el hash sea estable
    return {k: datos.get(k) for k in PipelineConfigSerializer().fields}

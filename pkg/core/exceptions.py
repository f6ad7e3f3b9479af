"""
Jerarquía de errores del pipeline de predicción de cortes.

Todo error "de usuario" (datos inválidos, configuración, orden de etapas) hereda
de PipelineError; los comandos lo traducen a código de salida 1.
"""


class PipelineError(Exception):
    """Error base de dominio."""


class DataValidationError(PipelineError):
    """Fila o campo inválido en un archivo de entrada."""

    def __init__(self, message, row=None, field=None, path=None):
        self.row = row
        self.field = field
        self.path = path
        partes = []
        if path:
            partes.append(str(path))
        if row is not None:
            partes.append(f'row {row}')
        if field:
            partes.append(f'field {field}')
        prefijo = f"[{', '.join(partes)}] " if partes else ''
        super().__init__(f'{prefijo}{message}')


class UnknownCountyError(PipelineError):
    def __init__(self, county_ids):
        self.county_ids = sorted(set(county_ids))
        super().__init__(f"unknown county_id(s): {', '.join(self.county_ids)}")


class ConfigError(PipelineError):
    pass


class StageOrderError(PipelineError):
    """Falta el artefacto de una etapa previa."""

    def __init__(self, stage, missing=None):
        self.stage = stage
        self.missing = missing
        detalle = f' (missing {missing})' if missing else ''
        super().__init__(f'run {stage} first{detalle}')


class ArtifactIntegrityError(PipelineError):
    pass


class MetricError(PipelineError):
    pass


class TrainingError(PipelineError):
    pass

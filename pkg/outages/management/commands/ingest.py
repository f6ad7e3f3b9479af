"""
Lee los cinco CSV de entrada y arma el panel condado × hora.

Uso:
    python manage.py ingest --config config.json
"""
from outages.management.base import PipelineCommand


class Command(PipelineCommand):
    help = 'Valida los CSV de entrada y escribe el panel, los datos estáticos y las tormentas'
    stage = 'ingest'

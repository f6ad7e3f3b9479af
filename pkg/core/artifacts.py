"""
Artefactos de etapa: archivos planos (CSV/JSON) más un manifest.json por etapa.

El manifest registra hash de configuración, semilla, versión de la etapa y los
SHA-256 de entradas y salidas. No incluye marcas de tiempo: dos corridas con la
misma configuración producen manifests idénticos byte a byte.
"""
import hashlib
import json
import logging
from pathlib import Path

from .exceptions import ArtifactIntegrityError, StageOrderError

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as fh:
        for bloque in iter(lambda: fh.read(1 << 20), b''):
            digest.update(bloque)
    return digest.hexdigest()


def dumps_canonical(data):
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_canonical(data), encoding='utf-8')
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding='utf-8'))


def config_hash(config_dict):
    return hashlib.sha256(dumps_canonical(config_dict).encode('utf-8')).hexdigest()


def _relative(path, base_dir):
    path = Path(path).resolve()
    try:
        return path.relative_to(Path(base_dir).resolve()).as_posix()
    except ValueError:
        return path.as_posix()


def write_manifest(stage_dir, stage, version, cfg_hash, seed, inputs, outputs, base_dir, documents=()):
    """
    Escribe el manifest de una etapa con los hashes de sus entradas y salidas.
    `documents` (xlsx, pdf) se listan sin hash: su contenido binario no es estable.
    """
    manifest = {
        'stage': stage,
        'version': version,
        'config_hash': cfg_hash,
        'seed': seed,
        'inputs': {_relative(p, base_dir): sha256_file(p) for p in inputs},
        'outputs': {_relative(p, base_dir): sha256_file(p) for p in outputs},
        'documents': sorted(_relative(p, base_dir) for p in documents),
    }
    return write_json(Path(stage_dir) / MANIFEST_NAME, manifest)


def require_artifacts(stage, paths):
    """Verifica que existan los artefactos de la etapa previa `stage`."""
    for path in paths:
        if not Path(path).exists():
            raise StageOrderError(stage, missing=Path(path).name)


def verify_stage(stage_dir, stage, base_dir):
    """
    Comprueba que las salidas registradas en el manifest de `stage` no hayan sido
    modificadas. Lanza StageOrderError si la etapa no se ejecutó y
    ArtifactIntegrityError si algún archivo cambió.
    """
    manifest_path = Path(stage_dir) / MANIFEST_NAME
    if not manifest_path.exists():
        raise StageOrderError(stage, missing=MANIFEST_NAME)
    manifest = read_json(manifest_path)
    base = Path(base_dir)
    for rel, esperado in manifest.get('outputs', {}).items():
        path = Path(rel) if Path(rel).is_absolute() else base / rel
        if not path.exists():
            raise StageOrderError(stage, missing=Path(rel).name)
        actual = sha256_file(path)
        if actual != esperado:
            logger.error('Hash de %s no coincide con el manifest de %s', rel, stage)
            raise ArtifactIntegrityError(f'artifact modified since {stage} ran: {rel}')
    return manifest

"""
Formatos de archivo: muestras (CSV o binario 'DSP1'), particiones (JSON),
especificaciones de referencia (JSON) y el manifiesto de cada ejecución.
"""
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional, Tuple
import csv
import io
import json
import logging
import os
import struct

import numpy as np
from packaging.version import InvalidVersion, Version

from seqpart import TOOL_NAME, __version__
from seqpart.models.base_model import FileFormatError, ValidationError
from seqpart.models.distributions import MixtureSpec, spec_from_dict
from seqpart.models.geometry import SampleSet
from seqpart.models.partition import PiecewiseConstantDensity

logger = logging.getLogger(__name__)

BINARY_MAGIC = b'DSP1'
_BINARY_HEADER = struct.Struct('<IQ')
MANIFEST_SUFFIX = '.manifest.json'


# ====================================================================
# MANIFIESTO
# ====================================================================

@dataclass
class RunManifest:
    """Todo lo necesario para reproducir una salida; sin marcas de tiempo."""
    command: str
    preset: Optional[str] = None
    spec_path: Optional[str] = None
    method: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    workers: int = 1
    tool: str = TOOL_NAME
    tool_version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def embedded_dict(self) -> Dict[str, Any]:
        """Versión incrustada en la salida: sin `workers`, que no altera el resultado."""
        data = self.to_dict()
        data.pop('workers')
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunManifest':
        known = {key: data[key] for key in cls.__dataclass_fields__ if key in data}
        if 'command' not in known:
            raise ValidationError("El manifiesto no indica el comando")
        return cls(**known)


def manifest_path(output_path: str) -> str:
    return output_path + MANIFEST_SUFFIX


def write_manifest(manifest: RunManifest, output_path: str) -> str:
    path = manifest_path(output_path)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(manifest.to_json() + '\n')
    return path


def check_compatibility(manifest: Dict[str, Any], source: str = '') -> bool:
    """Avisa si el archivo fue escrito por otra versión mayor de la herramienta."""
    raw = manifest.get('tool_version')
    if raw is None:
        logger.warning(f"{source}: el manifiesto no indica tool_version")
        return False
    try:
        written = Version(str(raw))
    except InvalidVersion:
        logger.warning(f"{source}: tool_version inválida {raw!r}")
        return False
    current = Version(__version__)
    if written.major != current.major:
        logger.warning(f"{source}: escrito con {TOOL_NAME} {written}, versión actual {current}")
        return False
    return True


# ====================================================================
# MUESTRAS
# ====================================================================

def write_samples_csv(samples: SampleSet, path: str, header: bool = True) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        if header:
            writer.writerow([f"x{j + 1}" for j in range(samples.dim)])
        for row in samples.data:
            writer.writerow([repr(float(v)) for v in row])


def write_samples_binary(samples: SampleSet, path: str) -> None:
    with open(path, 'wb') as handle:
        handle.write(BINARY_MAGIC)
        handle.write(_BINARY_HEADER.pack(samples.dim, samples.count))
        handle.write(np.ascontiguousarray(samples.data, dtype='<f8').tobytes())


def write_samples(samples: SampleSet, path: str, fmt: Optional[str] = None, header: bool = True) -> str:
    """Escribe en 'csv' o 'binary'; sin formato explícito decide por la extensión."""
    fmt = fmt or ('binary' if path.endswith(('.bin', '.dsp')) else 'csv')
    if fmt == 'binary':
        write_samples_binary(samples, path)
    elif fmt == 'csv':
        write_samples_csv(samples, path, header)
    else:
        raise ValidationError(f"Formato de muestras desconocido '{fmt}' (use csv o binary)")
    return fmt


def _read_binary(path: str) -> SampleSet:
    with open(path, 'rb') as handle:
        magic = handle.read(len(BINARY_MAGIC))
        if magic != BINARY_MAGIC:
            raise FileFormatError("Cabecera binaria inválida", path=path)
        raw = handle.read(_BINARY_HEADER.size)
        if len(raw) != _BINARY_HEADER.size:
            raise FileFormatError("Cabecera binaria truncada", path=path)
        d, n = _BINARY_HEADER.unpack(raw)
        payload = handle.read()
    expected = n * d * 8
    if d < 1 or len(payload) != expected:
        raise FileFormatError(f"Se esperaban {expected} bytes de datos (d={d}, N={n}), hay {len(payload)}",
                              path=path)
    data = np.frombuffer(payload, dtype='<f8').astype(np.float64).reshape(n, d)
    return SampleSet(data)


def _decode_text(path: str) -> str:
    with open(path, 'rb') as handle:
        raw = handle.read()
    try:
        return raw.decode('utf-8')
    except UnicodeDecodeError as e:
        line = raw.count(b'\n', 0, e.start) + 1
        raise FileFormatError(f"El archivo no es UTF-8 válido (byte {e.start})", line=line, path=path) from e


def _read_csv(path: str) -> SampleSet:
    rows = []
    dim = None
    with io.StringIO(_decode_text(path), newline='') as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                if line_no == 1 and not rows:
                    continue  # cabecera
                raise FileFormatError(f"Valor no numérico: {row}", line=line_no, path=path)
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise FileFormatError(f"Se esperaban {dim} columnas, hay {len(values)}", line=line_no, path=path)
            rows.append(values)
    if dim is None:
        raise FileFormatError("El archivo no contiene muestras", path=path)
    return SampleSet(np.asarray(rows, dtype=np.float64).reshape(-1, dim))


def read_samples(path: str) -> SampleSet:
    """Lee muestras detectando el formato por los bytes mágicos."""
    if not os.path.exists(path):
        raise FileFormatError("El archivo no existe", path=path)
    with open(path, 'rb') as handle:
        binary = handle.read(len(BINARY_MAGIC)) == BINARY_MAGIC
    samples = _read_binary(path) if binary else _read_csv(path)
    logger.debug(f"Leídas {samples.count} muestras de dimensión {samples.dim} desde {path}")
    return samples


# ====================================================================
# PARTICIONES Y ESPECIFICACIONES
# ====================================================================

def partition_to_json(pcd: PiecewiseConstantDensity, manifest: Optional[RunManifest] = None) -> str:
    """JSON determinista; los flotantes usan la representación más corta exacta."""
    payload = pcd.to_dict()
    if manifest is not None:
        payload['manifest'] = manifest.embedded_dict()
    return json.dumps(payload, separators=(',', ':'), allow_nan=False) + '\n'


def write_partition(pcd: PiecewiseConstantDensity, path: str, manifest: Optional[RunManifest] = None) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(partition_to_json(pcd, manifest))


def read_partition(path: str) -> Tuple[PiecewiseConstantDensity, Optional[Dict[str, Any]]]:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            payload = json.load(handle)
    except FileNotFoundError as e:
        raise FileFormatError("El archivo no existe", path=path) from e
    except json.JSONDecodeError as e:
        raise FileFormatError(f"JSON inválido: {e.msg}", line=e.lineno, path=path) from e
    except UnicodeDecodeError as e:
        raise FileFormatError("El archivo no es UTF-8 válido", path=path) from e
    if not isinstance(payload, dict):
        raise FileFormatError("La partición debe ser un objeto JSON", path=path)
    manifest = payload.pop('manifest', None)
    if isinstance(manifest, dict):
        check_compatibility(manifest, path)
    try:
        pcd = PiecewiseConstantDensity.from_dict(payload)
    except FileFormatError as e:
        raise FileFormatError(e.message, path=path) from e
    return pcd, manifest


def read_spec_file(path: str) -> MixtureSpec:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except FileNotFoundError as e:
        raise FileFormatError("El archivo no existe", path=path) from e
    except json.JSONDecodeError as e:
        raise FileFormatError(f"JSON inválido: {e.msg}", line=e.lineno, path=path) from e
    except UnicodeDecodeError as e:
        raise FileFormatError("El archivo no es UTF-8 válido", path=path) from e
    if not isinstance(data, dict):
        raise FileFormatError("La especificación debe ser un objeto JSON", path=path)
    data.setdefault('name', os.path.splitext(os.path.basename(path))[0])
    return spec_from_dict(data)

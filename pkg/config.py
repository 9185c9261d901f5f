import os
import logging


def _env_float(name, default):
    return float(os.getenv(name, default))


def _env_int(name, default):
    # Permite notación científica en variables de entorno (p.ej. 1e6)
    return int(float(os.getenv(name, default)))


class Config:
    """Configuración base del estimador. Aplica a todos los entornos."""

    # Parámetros del particionado secuencial (valores por defecto de los experimentos)
    DEFAULT_THETA = _env_float('SEQPART_THETA', '0.1')
    DEFAULT_M = _env_int('SEQPART_M', '10')
    DEFAULT_EPS = _env_float('SEQPART_EPS', '0.1')
    DEFAULT_N_MIN = _env_int('SEQPART_N_MIN', '10')
    DEFAULT_MAX_DEPTH = _env_int('SEQPART_MAX_DEPTH', '50')
    DEFAULT_MAX_LEAVES = _env_int('SEQPART_MAX_LEAVES', '1e6')

    # Paralelismo de los kernels numba (el resultado no depende de este valor)
    DEFAULT_WORKERS = _env_int('SEQPART_WORKERS', '1')

    # Discrepancia estrella: presupuesto del método exacto y búsqueda heurística
    STAR_EXACT_BUDGET = _env_int('SEQPART_STAR_EXACT_BUDGET', '2e8')
    STAR_RESTARTS = _env_int('SEQPART_STAR_RESTARTS', '100')
    STAR_ITERATIONS = _env_int('SEQPART_STAR_ITERATIONS', '1000')
    STAR_THRESHOLD_START = _env_float('SEQPART_STAR_THRESHOLD_START', '1e-2')
    STAR_SEED = _env_int('SEQPART_STAR_SEED', '0')

    # Distribuciones de referencia
    NORMALIZER_MC_SAMPLES = _env_int('SEQPART_NORMALIZER_MC_SAMPLES', '1e6')
    NORMALIZER_SEED = _env_int('SEQPART_NORMALIZER_SEED', '20240')
    NORMALIZER_CACHE_TTL = _env_int('SEQPART_NORMALIZER_CACHE_TTL', '3600')
    SAMPLER_BATCH = _env_int('SEQPART_SAMPLER_BATCH', '65536')
    SAMPLER_PROBE = _env_int('SEQPART_SAMPLER_PROBE', '1e6')

    # Umbral (ms) a partir del cual un comando se reporta como lento
    SLOW_COMMAND_THRESHOLD_MS = _env_float('SEQPART_SLOW_COMMAND_MS', '60000')

    # Nivel de logging por defecto
    LOG_LEVEL = logging.INFO
    LOG_FILE_ENABLED = os.getenv('SEQPART_LOG_FILE_ENABLED', 'false').lower() == 'true'
    LOG_FILE = os.getenv('SEQPART_LOG_FILE', 'seqpart.log')


class DevelopmentConfig(Config):
    """Configuración para desarrollo local."""
    DEBUG = True
    LOG_LEVEL = logging.DEBUG


class BenchmarkConfig(Config):
    """Configuración para reproducir las tablas de experimentos."""
    DEBUG = False
    LOG_LEVEL = logging.INFO

    # Usa todos los núcleos disponibles salvo que se indique lo contrario
    DEFAULT_WORKERS = _env_int('SEQPART_WORKERS', str(os.cpu_count() or 1))


class TestingConfig(Config):
    """Configuración específica para pruebas (presupuestos reducidos)."""
    TESTING = True
    DEBUG = False
    LOG_LEVEL = logging.DEBUG

    STAR_RESTARTS = 20
    STAR_ITERATIONS = 200
    NORMALIZER_MC_SAMPLES = 200000
    SAMPLER_PROBE = 100000


# Diccionario de configuración final
config = {
    'development': DevelopmentConfig,
    'benchmark': BenchmarkConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}

from config import config
import logging
import sys

__version__ = '1.0.0'
TOOL_NAME = 'seqpart'

# ====================================================================
# 1. Contenedor de la aplicación
# ====================================================================
class SeqpartApp:
    """Aplicación configurada: diccionario de configuración y nombre del entorno."""

    def __init__(self, config_name: str):
        self.config_name = config_name
        self.config = {}

    def from_object(self, obj) -> None:
        """Copia los atributos en mayúsculas de una clase de configuración."""
        for key in dir(obj):
            if key.isupper():
                self.config[key] = getattr(obj, key)

    def __repr__(self):
        return f'<SeqpartApp {self.config_name}>'


# ====================================================================
# 2. Funciones de ayuda y configuración modular
# ====================================================================
def configure_logging(app):
    """Configura el sistema de logging de la aplicación."""
    log_level = app.config.get('LOG_LEVEL', logging.INFO)

    log_format = (
        '%(asctime)s - [%(levelname)s] - %(name)s - '
        '%(funcName)s:%(lineno)d - %(message)s'
    )

    handlers = []

    # La salida estándar queda reservada para resultados (CSV, tablas, JSON)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(logging.Formatter(log_format))
    handlers.append(console_handler)

    if app.config.get('LOG_FILE_ENABLED', False):
        log_file = app.config.get('LOG_FILE', 'seqpart.log')
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(log_level)
        file_handler.setFormatter(logging.Formatter(log_format))
        handlers.append(file_handler)

    logging.basicConfig(
        level=log_level,
        format=log_format,
        handlers=handlers,
        force=True  # Sobrescribir configuración existente
    )

    # Silenciar el compilador JIT
    logging.getLogger('numba').setLevel(logging.WARNING)

    app_logger = logging.getLogger('seqpart')
    app_logger.setLevel(log_level)
    app_logger.debug("Sistema de logging configurado exitosamente")


def configure_workers(workers: int) -> int:
    """Fija el número de hilos de los kernels numba; devuelve el valor efectivo."""
    import numba

    effective = max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(effective)
    return effective


# ====================================================================
# 3. La función principal de creación de la aplicación
# ====================================================================
def create_app(config_name: str = 'default') -> SeqpartApp:
    app = SeqpartApp(config_name)
    app_config = config.get(config_name, config['default'])
    app.from_object(app_config)
    app.config['CONFIG_NAME'] = config_name

    configure_logging(app)
    logger = logging.getLogger(__name__)
    logger.debug(f"Using configuration: {config_name}")

    app.config['WORKERS'] = configure_workers(app.config.get('DEFAULT_WORKERS', 1))
    logger.debug(f"Numba threads: {app.config['WORKERS']}")
    return app

import os
import logging
from logging.handlers import RotatingFileHandler
from scripts.settings import LOG_LEVEL, get_my_env_var

_log_format: str = "[%(asctime)s] %(levelname)s [%(name)s.%(funcName)s:%(lineno)d] %(message)s"
_dateftm: str = "%d/%B/%Y %H:%M:%S"


def get_file_handler(name: str) -> logging.FileHandler:
    """
    Creates a rotating file handler for logging.

    The handler writes to "<name>.log" in the "logging" directory under the
    BALANCER_ROOT environment variable, rotating at 10.5 MiB with three backups.

    :param name: The name to give to the file handler, which will also be the
                 base name of the log file.
    :return: A logging.FileHandler object.
    """
    log_dir_name: str = f"{get_my_env_var('BALANCER_ROOT', '.')}/logging"
    os.makedirs(log_dir_name, exist_ok=True)
    file_handler: RotatingFileHandler = RotatingFileHandler(
        filename=f"{log_dir_name}/{name}.log",
        mode='a',
        maxBytes=int(10.5 * pow(1024, 2)),
        backupCount=3
    )
    file_handler.setFormatter(logging.Formatter(_log_format, datefmt=_dateftm))
    return file_handler


def get_stream_handler() -> logging.StreamHandler:
    """
    Creates a handler writing to standard error, so that standard output only carries results.
    """
    stream_handler: logging.StreamHandler = logging.StreamHandler()
    stream_handler.setLevel(logging.INFO)
    stream_handler.setFormatter(logging.Formatter(_log_format))
    return stream_handler


def get_logger(name: str) -> logging.Logger:
    """
    Creates a logger with the given name.

    The logger writes to a rotating file under BALANCER_ROOT/logging and to standard error.
    Its level comes from the LOG_LEVEL setting.

    :param name: The name to give to the logger.
    :return: A configured logging.Logger object.
    """
    logger: logging.Logger = logging.getLogger(name)
    if logger.hasHandlers():
        logger.handlers.clear()
    logger.setLevel(LOG_LEVEL)
    logger.addHandler(get_file_handler(name))
    logger.addHandler(get_stream_handler())
    return logger

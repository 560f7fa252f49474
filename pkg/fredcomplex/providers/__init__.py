import logging


def logger():
    """Return a logger."""
    from fredcomplex.providers.logger import BaseLogger

    logging.setLoggerClass(BaseLogger)
    logger_name = 'FREDCOMPLEX'

    return logging.getLogger(logger_name)


Logger = logger()

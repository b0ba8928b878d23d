"""
logging bootstrap for the package.

all modules log through ``logging.getLogger(__name__)``; this module only
attaches handlers to the ``amcbackdoor`` logger.
"""

import logging
from typing import Optional

LOGGER_NAME = 'amcbackdoor'
FORMAT = '%(asctime)s ¦ %(name)s ¦ %(levelname)s ¦ %(message)s'

_handlers = []


def start_logging(console_level: str = 'INFO',
                  file_level: str = 'DEBUG',
                  log_file: Optional[str] = None) -> logging.Logger:
    """
    attach a console handler and, when ``log_file`` is given, a file
    handler. calling it again replaces the handlers it installed before.
    """
    logger = logging.getLogger(LOGGER_NAME)
    stop_logging()

    console = logging.StreamHandler()
    console.setLevel(console_level)
    console.setFormatter(logging.Formatter(FORMAT))
    _handlers.append(console)

    if log_file is not None:
        filehandler = logging.FileHandler(log_file)
        filehandler.setLevel(file_level)
        filehandler.setFormatter(logging.Formatter(FORMAT))
        _handlers.append(filehandler)

    for handler in _handlers:
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)
    logging.captureWarnings(True)
    return logger


def stop_logging() -> None:
    logger = logging.getLogger(LOGGER_NAME)
    while _handlers:
        handler = _handlers.pop()
        logger.removeHandler(handler)
        handler.close()


def conditionally_start_logging() -> None:
    """ start logging if the configuration asks for it on import """
    from amcbackdoor import config
    if config['logger.start_logging_on_import']:
        start_logging(config['logger.console_level'],
                      config['logger.file_level'],
                      config['logger.log_file'])

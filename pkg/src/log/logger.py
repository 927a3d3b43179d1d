import os
import logging
from typing import Optional
import time

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(filename)s:%(lineno)d | %(funcName)s() | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class LocalTimezoneFormatter(logging.Formatter):
    """Custom formatter that uses local timezone"""

    def formatTime(
        self, record: logging.LogRecord, datefmt: Optional[str] = None
    ) -> str:
        # Convert UTC to local time
        ct = self.converter(record.created)
        if datefmt:
            return time.strftime(datefmt, ct)
        return time.strftime(DATE_FORMAT, ct)


def get_logger(
    name: str = __name__,
    level: Optional[int | str] = None,
) -> logging.Logger:
    """
    Get a console logger for the solver.

    Args:
        name: Logger name, usually the module name.
        level: Explicit level. Defaults to the `APP_LOG_LEVEL` environment
            variable, or WARNING when that is unset.

    Returns:
        logging.Logger: The configured logger. Calling this again with the same
        name returns the same logger without stacking another handler.
    """
    if level is None:
        level = os.getenv("APP_LOG_LEVEL", logging.WARNING)

    logger = logging.getLogger(name)
    logger.setLevel(level)

    if not logger.handlers:
        formatter = LocalTimezoneFormatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger

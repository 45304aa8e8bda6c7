import logging
import sys

from loguru import logger

from .settings import settings

TIME = "<green>{time:YYYY-MM-DD HH:mm:ss.SS}</green>"


def _stderr(message) -> None:
    # looked up per message; sys.stderr may be swapped after configuration
    sys.stderr.write(message)


def configure_logger(command: str = "sinetype", quiet: bool = False) -> None:
    """
    One stderr sink for the whole run. stdout stays reserved for the
    JSON summary; `quiet` keeps only warnings and errors.
    """
    logger.remove()
    if settings.debug:
        level = "DEBUG"
    else:
        level = "WARNING" if quiet else "INFO"
    logger.configure(extra={"command": command})
    logger.add(_stderr, level=level, format=Formatter(settings.debug).format)

    # numpy and scipy report through warnings; route them into loguru too
    logging.captureWarnings(True)
    logging.getLogger("py.warnings").handlers = [WarningHandler()]


class Formatter:
    def __init__(self, debug: bool = False):
        self.minimal_fmt = (
            TIME + " | <level>{level}</level> | {extra[command]} | "
            "<level>{message}</level>\n"
        )
        if debug:
            self.fmt = (
                TIME + " | <level>{level: <7}</level> | "
                "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
                "<level>{message}</level>\n"
            )
        else:
            self.fmt = self.minimal_fmt

    def format(self, record) -> str:
        if record["function"] == "emit":  # forwarded warnings
            return self.minimal_fmt
        return self.fmt


class WarningHandler(logging.Handler):
    def emit(self, record):
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno
        logger.log(level, record.getMessage())

import logging
import sys

from .envs import FY_DEBUG

FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"


def _make_logger(name: str = "fynet") -> logging.Logger:
    _logger = logging.getLogger(name)

    if not _logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
        _logger.addHandler(handler)
        _logger.propagate = False

    _logger.setLevel(logging.DEBUG if FY_DEBUG else logging.INFO)

    return _logger


logger = _make_logger()

__all__ = ["logger"]

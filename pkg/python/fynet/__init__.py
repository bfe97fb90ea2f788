__path__ = __import__("pkgutil").extend_path(__path__, __name__)

from .utils.logger import logger
from .utils.envs import *


__version__ = FY_VERSION

if not FY_QUIET:
    logger.debug(FY_LOGO)

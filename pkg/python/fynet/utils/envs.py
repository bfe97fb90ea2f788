import os
import getpass
import datetime

try:
    from ..__version__ import version
except Exception:
    FY_VERSION = "alpha"
else:
    FY_VERSION = version


def _flag(name: str, default: bool = False) -> bool:
    value = os.environ.get(name, None)
    if value is None:
        return default
    return value.strip().lower() not in ("", "0", "false", "no", "off")


FY_DEBUG = _flag("FY_DEBUG", False)

FY_QUIET = _flag("FY_QUIET", False)

FY_SEED = int(os.environ.get("FY_SEED", 20240917))
"""default seed of every randomized operation"""

FY_RESTARTS = int(os.environ.get("FY_RESTARTS", 64))

FY_MAX_DIMENSION = int(os.environ.get("FY_MAX_DIMENSION", 2**20))
"""cap on the total Hilbert-space dimension of the dense backend"""

FY_JOBID = f"fynet_{getpass.getuser().lower()}_{os.uname().nodename.lower()}_{os.getpid()}"

FY_LOGO = rf"""
###################################################################################################

    ______      _   __     __
   / ____/_  __/ | / /__  / /_
  / /_  / / / /  |/ / _ \/ __/
 / __/ / /_/ / /|  /  __/ /_
/_/    \__, /_/ |_/\___/\__/
      /____/

 Graph-state fidelity bounds and triangle-network protocols

 version = {FY_VERSION}

 Run by {getpass.getuser()} at {datetime.datetime.now().isoformat()}.
 Job ID: {FY_JOBID}

###################################################################################################
"""

__all__ = ["FY_DEBUG", "FY_JOBID", "FY_LOGO", "FY_QUIET", "FY_VERSION", "FY_SEED", "FY_RESTARTS", "FY_MAX_DIMENSION"]

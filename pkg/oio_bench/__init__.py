"""
Online inventory optimization benchmark.

Implements the online inventory protocol, the OSD/COSD/MaxCOSD policy family,
exact regret against hindsight oracles, bound checkers, adversarial demand
constructions and the reference experiment settings.
"""
from oio_bench.core.config import settings

__version__ = settings.VERSION

__all__ = ["settings", "__version__"]

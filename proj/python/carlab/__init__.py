"""Continual-learning lab: cluster-aware replay with a feature-space
separation penalty, sequential training, and retention metrics."""

from ._carlab import *  # noqa: F401,F403
from ._carlab import __doc__  # noqa: F401

__version__ = "0.1.0"

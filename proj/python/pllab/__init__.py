"""Numerical laboratory for globally Polyak-Lojasiewicz landscapes."""

from _pllab import *  # noqa: F401,F403
from _pllab import __doc__  # noqa: F401

"""Multilingual corpus preparation toolkit (C++ core with python bindings)."""

from ._corpusprep import *  # noqa: F401,F403
from ._corpusprep import __version__  # noqa: F401

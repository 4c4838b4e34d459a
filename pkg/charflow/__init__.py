"""
Provides version, author and exports
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version('charflow')
except PackageNotFoundError:
    __version__ = '0.0.0'

__author__ = 'charflow developers'

from . import lib

"""Computable nets: finite-section probes for trace and determinant class,
Fredholm determinants, and Bochner integration by simple-function nets."""

from . import bochner, cli, lcspace, measure, netcore, opcalc, sequences
from .errors import *  # noqa: F401,F403
from .sequences import EigenSequence, parse_sequence

__version__ = "0.1.0"

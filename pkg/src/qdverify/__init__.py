"""Measurement-based verification of quantum discord.

Verdicts never claim exactly zero discord: with finite tolerances the
toolkit can only either witness nonzero discord or fail to refute zero.
"""

__version__ = "0.1.0"

from . import dv, gaussian, linalg, phasespace, povm, tomo  # noqa: F401
from .dv import CONSISTENT_WITH_ZERO, NONZERO_DISCORD  # noqa: F401

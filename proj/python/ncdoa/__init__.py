"""Sparse recovery DOA estimation with noncoherent subarrays."""

from ._core import *  # noqa: F401,F403
from ._core import EstimationFailed, NumericalError  # noqa: F401

__version__ = "0.1.0"

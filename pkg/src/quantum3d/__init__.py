"""Exact quantization of three-dimensional Lie bialgebras."""

from ._backend import BACKEND
from .kernel import PARAMETERS, ParamPoly, TruncationError, ZSeries, rational

__version__ = "0.1.0"

__all__ = ["BACKEND", "PARAMETERS", "ParamPoly", "TruncationError", "ZSeries", "rational", "__version__"]

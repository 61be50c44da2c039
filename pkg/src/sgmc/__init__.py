"""Random staircase generator matrix codes, LC-ROSD decoding and finite-length bounds."""

from ._jit import backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]

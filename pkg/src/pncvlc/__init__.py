"""Two-way relay physical-layer network coding over an OFDM/QPSK visible-light link."""

__version__ = "0.1.0"

from pncvlc.errors import ConfigurationError, FramingError, PncVlcError

__all__ = ["ConfigurationError", "FramingError", "PncVlcError", "__version__"]

class PncVlcError(Exception):
    """Base class for simulator errors."""

    exit_code = 1


class ConfigurationError(PncVlcError, ValueError):
    """Invalid parameter or scenario configuration.

    ``path`` names the offending field (``snr_sweep.step_db``) when known.
    """

    exit_code = 2

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class FramingError(PncVlcError, ValueError):
    """Bit or sample counts inconsistent with the frame layout."""

    exit_code = 3

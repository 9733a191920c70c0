"""Error taxonomy shared by the whole package.

ConfigurationError maps to CLI exit code 2, NumericalError to exit code 3.
"""


class ConfigurationError(ValueError):
    """Invalid configuration or violated operation precondition."""


class NumericalError(RuntimeError):
    """Numerical failure at run time (norm drift, NaN, non-convergence).

    May carry a diagnostic payload in ``diagnostic`` (dict) for the CLI to dump.
    """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}

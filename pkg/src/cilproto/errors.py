"""Exception taxonomy shared across the package.

ConfigError covers bad parameters, specs, and run-config documents
(caller mistakes knowable before touching data). DataError covers bad
file contents and inconsistent data (label mismatches, size mismatches,
non-finite values). The CLI maps them to distinct exit codes.
"""


class CilprotoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CilprotoError):
    """Invalid parameter, spec, or configuration document."""


class DataError(CilprotoError):
    """Invalid or inconsistent data content (files or in-memory sets)."""

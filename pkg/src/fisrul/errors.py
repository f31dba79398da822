"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad user-facing configuration: unknown feature name, invalid filter
    frame, mismatched feature sets between files, and the like."""


class LoadError(RuntimeError):
    """A dataset file could not be parsed.  The message names the offending
    file and, when known, the line number."""

"""Error taxonomy shared across the package.

Argument errors use the builtin ValueError.  CapacityError marks work that
would exceed a configured enumeration/sampling budget (never silently
truncated); ConfigError marks invalid or unsupported configurations.
"""


class CapacityError(Exception):
    """Requested computation exceeds a configured work cap."""


class ConfigError(Exception):
    """Invalid or unsupported configuration."""

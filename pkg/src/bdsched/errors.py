"""Exception types shared across the package."""


class ModelError(ValueError):
    """Malformed packets or buffers: mixed deadline kinds, bad weights, duplicate ids."""


class TraceError(ValueError):
    """Malformed or inconsistent trace: bad event order, inadmissible expirations."""


class HarnessError(ValueError):
    """Illegal harness action: absent packets, off-frontier adversary moves, bad draws."""


class ConfigError(ValueError):
    """Invalid generator or CLI configuration."""

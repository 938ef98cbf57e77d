"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operand lengths or matrix shapes do not line up."""


class MembershipError(ValueError):
    """A vector was required to lie in a code but does not."""


class DomainError(ValueError):
    """A numeric argument is outside the domain of a formula."""


class DecodeFailure(Exception):
    """The syndrome has no correctable error pattern of weight <= t."""

    def __init__(self, syndrome, t):
        super().__init__(f"no error of weight <= {t} has syndrome {syndrome}")
        self.syndrome = syndrome
        self.t = t


class UnsupportedAttack(ValueError):
    """The attack model cannot act on the requested state representation."""


class SizeLimitError(ValueError):
    """A dense simulation would exceed the configured qubit cap."""


class ConfigError(ValueError):
    """Invalid run configuration; ``key`` names the offending dotted key."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key

"""Exception hierarchy shared by every module."""


class SrdsError(Exception):
    """Base class for library errors."""


class ParameterError(SrdsError, ValueError):
    """A caller supplied parameters outside the operation's domain."""


class MalformedInputError(SrdsError, ValueError):
    """Input bytes or structures do not parse or have inconsistent lengths."""


class NoSigningKeyError(SrdsError):
    """Signing was attempted with a key pair that has no secret key."""


class ConfigurationError(SrdsError):
    """Incompatible combination of scheme, profile and party count."""


class EngineError(SrdsError):
    """The round engine was asked to do something impossible."""


class InvariantError(SrdsError):
    """A run finished but broke a property that must hold on every run."""

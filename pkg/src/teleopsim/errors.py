"""Exception hierarchy shared by all teleopsim modules."""


class TeleopsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TeleopsimError):
    """Invalid or inconsistent configuration values."""


class NotFoundError(TeleopsimError):
    """Unknown preset or missing resource."""


class ShapeError(TeleopsimError):
    """Array dimensions do not match the robot description."""


class NumericalError(TeleopsimError):
    """NaN or infinity encountered where finite values are required."""


class DegenerateRobot(TeleopsimError):
    """Robot has no actuated lower body, so the policy action space is empty."""


class ProtocolError(TeleopsimError):
    """Base class for wire-protocol decode failures."""


class BadMagic(ProtocolError):
    """Frame does not start with the expected magic bytes."""


class BadLength(ProtocolError):
    """Frame length or declared payload length is inconsistent."""


class BadCrc(ProtocolError):
    """Frame checksum mismatch (corruption detected)."""


class BadVersion(ProtocolError):
    """Frame carries an unsupported protocol version."""


class Disconnected(TeleopsimError):
    """Transport channel is closed."""


class EmptyEpisode(TeleopsimError):
    """Metrics requested over an empty record list."""


class VersionError(TeleopsimError):
    """Record file schema version is not supported."""


class TruncationError(TeleopsimError):
    """Record file ends mid-episode (no end marker or cut line)."""

"""Exception types shared across the package."""


class KolcorrError(Exception):
    """Base class for all package errors."""


class InvalidParams(KolcorrError, ValueError):
    pass


class InvalidLetter(KolcorrError, ValueError):
    pass


class ValidationError(KolcorrError):
    """A structural check on a computed object failed."""


class ResourceLimit(KolcorrError):
    """The requested computation would exceed a configured size or memory bound."""


class FormatError(KolcorrError):
    """A persisted file is malformed (bad magic, version, CRC or truncation)."""


class BadMagic(FormatError):
    pass


class VersionMismatch(FormatError):
    pass


class CRCMismatch(FormatError):
    pass

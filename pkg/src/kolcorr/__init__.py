"""Exact and estimated autocorrelation of generalized Kolakoski sequences."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BadMagic,
    CRCMismatch,
    FormatError,
    InvalidLetter,
    InvalidParams,
    KolcorrError,
    ResourceLimit,
    ValidationError,
    VersionMismatch,
)
from .seqcore import Params, kolakoski  # noqa: E402

# -*- coding: utf-8 -*-
#
# errors.py
#
"""Exception classes raised by the lccr package.

All exceptions derive from ``LCCRError``. Where it makes sense, an exception
also derives from a matching builtin exception, so callers can catch e.g.
``ValueError`` without knowing about this module.

"""

__all__ = (
    'BadSupport',
    'CapabilityMissing',
    'ChecksumMismatch',
    'ChunkFormatError',
    'DecodeError',
    'DimensionMismatch',
    'DomainError',
    'FieldError',
    'HelperGroupDown',
    'InconsistentBlocks',
    'InsufficientBlocks',
    'InsufficientHelpers',
    'LCCRError',
    'ManifestError',
    'MultipleGroupFailures',
    'NeighborUnavailable',
    'ParameterError',
    'PlanInvalid',
    'RepairError',
    'ScenarioInvalid',
    'Singular',
    'StorageError',
    'TooLarge',
    'Unrecoverable',
    'UnrepairableFailure',
    'WrongHelperCount',
    'ZeroInverse',
)


class LCCRError(Exception):
    """Base general LCCR exception.

    All other exceptions in this module derive from it.

    """


# Finite field and matrix algebra

class FieldError(LCCRError, ValueError):
    """Raised for an invalid field specification or out-of-range element."""


class ZeroInverse(LCCRError, ZeroDivisionError):
    """Raised when the multiplicative inverse of zero is requested."""


class DimensionMismatch(LCCRError, ValueError):
    """Raised when matrix shapes do not fit the requested operation."""


class Singular(LCCRError, ArithmeticError):
    """Raised when a matrix is not invertible or a system is rank deficient."""


class BadSupport(LCCRError, ValueError):
    """Raised when Cauchy matrix support elements collide."""


# Code parameters

class ParameterError(LCCRError, ValueError):
    """Raised when a code parameter set violates its invariants."""


class CapabilityMissing(LCCRError):
    """Raised when the parameters do not permit the requested operation."""


class TooLarge(LCCRError):
    """Raised when an exhaustive enumeration exceeds its guard."""


class DomainError(LCCRError, ValueError):
    """Raised when a closed-form metric is evaluated outside its domain."""


# Decoding

class DecodeError(LCCRError):
    """Base class of decoding failures."""


class InsufficientBlocks(DecodeError):
    """Raised when fewer blocks are available than decoding needs."""


class InconsistentBlocks(DecodeError):
    """Raised when an overdetermined system has no solution (corruption)."""


class Unrecoverable(DecodeError):
    """Raised when the surviving blocks do not determine the message."""


# Repair

class RepairError(LCCRError):
    """Base class of repair failures."""


class WrongHelperCount(RepairError, ValueError):
    """Raised when a node repair receives the wrong number of helpers or a
    helper payload of the wrong length."""


class InsufficientHelpers(RepairError):
    """Raised when too few surviving nodes are available for a repair."""


class NeighborUnavailable(RepairError):
    """Raised when an adjacent group cannot supply its MSR parity blocks."""


class HelperGroupDown(RepairError):
    """Raised when a group needed by a fixed repair chain is unavailable."""


class PlanInvalid(RepairError):
    """Raised when a repair plan step cannot be executed against a state."""


class MultipleGroupFailures(RepairError):
    """Raised when the MSR-local baseline faces two or more failed groups."""


class UnrepairableFailure(RepairError):
    """Raised by high-level repair calls when the planner gives up.

    The ``unrecovered`` attribute lists the groups which could not be
    reached.

    """

    def __init__(self, msg, unrecovered=()):
        super().__init__(msg)
        self.unrecovered = tuple(unrecovered)


# Harness

class ScenarioInvalid(LCCRError, ValueError):
    """Raised when a simulation scenario does not fit the code parameters."""


class StorageError(LCCRError):
    """Base class of chunk and manifest file errors."""


class ChecksumMismatch(StorageError):
    """Raised when a chunk file does not match its recorded checksum."""

    def __init__(self, msg, chunk=None):
        super().__init__(msg)
        self.chunk = chunk


class ChunkFormatError(StorageError):
    """Raised when a chunk file header or payload is malformed."""


class ManifestError(StorageError):
    """Raised when a manifest file cannot be read or is inconsistent."""

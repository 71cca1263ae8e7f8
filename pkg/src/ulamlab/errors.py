"""Exception hierarchy shared by every ulamlab module."""

import numpy as np


class UlamError(Exception):
    """Base class for all library errors."""


class UsageError(UlamError, ValueError):
    """A precondition of an operation was violated by the caller."""


class GroupLoadError(UlamError, ValueError):
    """A Cayley table does not describe a group."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotASubgroupError(UsageError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NotNormalError(UsageError):
    def __init__(self, message, conjugation=None):
        super().__init__(message)
        self.conjugation = conjugation


class BallCapError(UsageError):
    def __init__(self, count, cap):
        super().__init__(f"ball has {count} words, exceeding the cap of {cap}")
        self.count = count
        self.cap = cap


class SingularMatrixError(UlamError, np.linalg.LinAlgError):
    def __init__(self, message, smallest_singular_value, where=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value
        self.where = where


class NonNormalMatrixError(UlamError, np.linalg.LinAlgError):
    def __init__(self, commutator_norm):
        super().__init__(f"matrix is not normal: ||A*A - AA*|| = {commutator_norm:.3e}")
        self.commutator_norm = commutator_norm


class SpectralGapError(UlamError, np.linalg.LinAlgError):
    def __init__(self, message, eigenvalue):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class BoundViolation(UlamError, AssertionError):
    """A bound that should hold by construction was measured to fail."""

    def __init__(self, statement, value, bound, witness=None):
        super().__init__(f"{statement}: measured {value!r} exceeds bound {bound!r} (witness {witness!r})")
        self.statement = statement
        self.value = value
        self.bound = bound
        self.witness = witness

"""Exception hierarchy shared by all modules.

Every exception carries its class name as the machine-readable error name
used by the command line tool.
"""

from __future__ import annotations


class MLError(Exception):
    """Base class for all errors raised by :mod:`mlmatrix`."""

    @property
    def name(self) -> str:
        return type(self).__name__


class SingularShift(MLError, ZeroDivisionError):
    pass


class NoConvergence(MLError, ArithmeticError):
    pass


class EigenvalueOverlap(MLError, ArithmeticError):
    pass


class Overflow(MLError, OverflowError):
    pass


class TaylorNotApplicable(MLError, ValueError):
    pass


class NormTooLarge(MLError, ValueError):
    pass


class InvalidRatio(MLError, ValueError):
    pass


class GammaOverflow(MLError, OverflowError):
    pass


class ConfluentBlock(MLError, ArithmeticError):
    pass


class NoViableRadius(MLError, ArithmeticError):
    pass


class PathUnavailable(MLError, ValueError):
    pass


class ZeroReference(MLError, ZeroDivisionError):
    pass


class SeriesNotDecayed(MLError, ArithmeticError):
    pass

"""Exception hierarchy.

Every contract failure raised by the library derives from
:class:`NervekitError` and carries an optional ``witness`` describing the
offending input (a triple of indices, a sample, a radius, ...). The CLI
prints the witness and exits with status 1.
"""

from __future__ import annotations

from typing import Any


class NervekitError(Exception):
    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


# metric_core
class InvalidMetric(NervekitError, ValueError):
    pass


class AsymmetricMatrix(InvalidMetric):
    pass


class NegativeEntry(InvalidMetric):
    pass


class TriangleViolation(InvalidMetric):
    pass


class EmptySpace(NervekitError, ValueError):
    pass


# model_spaces
class UnsupportedKind(NervekitError, ValueError):
    pass


class NotConvex(NervekitError, ValueError):
    pass


# gromov_hausdorff
class DomainMismatch(NervekitError, ValueError):
    pass


class TooLarge(NervekitError, ValueError):
    pass


class EndpointMismatch(NervekitError):
    pass


class TimeMismatch(NervekitError, ValueError):
    pass


# nerve
class VertexCountMismatch(NervekitError, ValueError):
    pass


class NoStableRadius(NervekitError):
    pass


class NonMonotoneFamily(NervekitError):
    pass


class NerveTruncated(NervekitError):
    pass


# realization
class ScaleMismatch(NervekitError, ValueError):
    pass


class Disconnected(NervekitError):
    pass


class ApexInput(NervekitError, ValueError):
    pass


# homotopy
class ThinCovering(NervekitError):
    pass


class SupportNotSimplex(NervekitError):
    pass


class NotInD(NervekitError, ValueError):
    pass


class BadContraction(NervekitError):
    pass


class MissingFamilyMember(NervekitError, KeyError):
    pass


class NoContainingBall(NervekitError):
    pass


class RadiusOverflow(NervekitError):
    pass


class TooFar(NervekitError):
    pass


# verify
class DegenerateDomain(NervekitError, ValueError):
    pass

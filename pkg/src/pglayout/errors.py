"""Exception types raised across the package."""


class PangenomeError(ValueError):
    """Base class for all pglayout errors."""


class InvalidParameter(PangenomeError):
    pass


class UnknownNode(PangenomeError):
    pass


class EmptyPath(PangenomeError):
    pass


class EmptyGraph(PangenomeError):
    pass


class DegenerateGraph(PangenomeError):
    pass


class IndexOutOfRange(PangenomeError, IndexError):
    pass


class MalformedLine(PangenomeError):
    pass


class UnknownSegment(PangenomeError):
    pass


class NoPaths(PangenomeError):
    pass


class UnsupportedRecord(PangenomeError):
    pass


class NonFiniteCoordinate(PangenomeError):
    pass


class MalformedRow(PangenomeError):
    pass


class CountMismatch(PangenomeError):
    pass


class ZeroReference(PangenomeError, ZeroDivisionError):
    pass


class CorpusTooLarge(PangenomeError):
    pass

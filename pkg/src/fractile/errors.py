"""Exception types shared across the package."""


class FractileError(Exception):
    pass


class ParseError(FractileError):
    pass


# -- supertile algebra --------------------------------------------------

class DuplicateLocation(FractileError):
    pass


class NotStableInput(FractileError):
    pass


# -- generators / fractals ----------------------------------------------

class GeneratorError(FractileError):
    pass


class MissingOrigin(GeneratorError):
    pass


class EmptyRowOrColumn(GeneratorError):
    pass


class NotConnected(GeneratorError):
    pass


class DegenerateBox(GeneratorError):
    pass


class NotProperSubset(GeneratorError):
    pass


class BudgetExceeded(FractileError):
    pass


class IndexOutOfRange(FractileError):
    pass


# -- carpet tables ------------------------------------------------------

class ClassOutOfRange(FractileError):
    pass


class PositionNotIndexed(FractileError):
    pass


# -- compiler -----------------------------------------------------------

class NotFourSided(FractileError):
    pass


class NotPerimeterOnly(FractileError):
    pass


class NoHamiltonianPath(FractileError):
    pass


class SegmentTooShort(FractileError):
    pass


class FillNotAnchorable(FractileError):
    pass


# -- engine -------------------------------------------------------------

class FrontierBudgetExceeded(FractileError):
    pass


class SearchBudgetExceeded(FractileError):
    pass


class NotProducibleInput(FractileError):
    pass

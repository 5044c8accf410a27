"""Exception hierarchy shared by all modules."""


class MilpRetrievalError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstance(MilpRetrievalError, ValueError):
    pass


class MpsError(MilpRetrievalError, ValueError):
    pass


class MalformedSection(MpsError):
    pass


class UnknownRowOrColumn(MpsError):
    pass


class EmptyProblem(MpsError):
    pass


class UnknownClass(MilpRetrievalError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class InvalidParams(MilpRetrievalError, ValueError):
    pass


class DimensionMismatch(MilpRetrievalError, ValueError):
    pass


class InvalidConfig(MilpRetrievalError, ValueError):
    pass


class ShapeMismatch(MilpRetrievalError, ValueError):
    pass


class EmptyText(MilpRetrievalError, ValueError):
    pass


class DegenerateBatch(MilpRetrievalError, ValueError):
    pass


class InvalidK(MilpRetrievalError, ValueError):
    pass


class DegenerateGroup(MilpRetrievalError, ValueError):
    pass


class EmptyLibrary(MilpRetrievalError):
    pass


class CorruptLibrary(MilpRetrievalError):
    pass


class VersionMismatch(MilpRetrievalError):
    pass


class CorruptCheckpoint(MilpRetrievalError):
    pass

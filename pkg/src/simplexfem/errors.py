"""Exception hierarchy shared by every module of the package."""


class FemError(Exception):
    """Base class for all errors raised by simplexfem."""


class ShapeMismatchError(FemError, ValueError):
    pass


class IndexOutOfRangeError(FemError, IndexError):
    pass


class NonPositiveVolumeError(FemError, ValueError):
    def __init__(self, element, measure):
        self.element = element
        self.measure = measure
        super().__init__(
            f"element {element} has non-positive signed measure {measure:.6g}"
        )


class DegenerateElementError(FemError, ValueError):
    pass


class InvalidFlagValueError(FemError, ValueError):
    pass


class InvalidParameterError(FemError, ValueError):
    pass


class ParseError(FemError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class MeshIOError(FemError, OSError):
    pass


class UnsortedIndexSetError(FemError, ValueError):
    pass


class UnknownRuleError(FemError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class TooLargeForDenseError(FemError, MemoryError):
    pass


class NoDirichletBoundaryError(FemError):
    pass


class UnsupportedBoundaryTypeError(FemError, NotImplementedError):
    pass


class NotPositiveDefiniteError(FemError, ArithmeticError):
    pass


class MaxIterExceededError(FemError, RuntimeError):
    """CG hit its iteration cap; the best iterate travels with the error."""

    def __init__(self, x, iterations, relres):
        self.x = x
        self.iterations = iterations
        self.relres = relres
        super().__init__(
            f"CG did not converge in {iterations} iterations "
            f"(relative residual {relres:.3e})"
        )

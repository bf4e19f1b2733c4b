"""Exception hierarchy shared by all modules."""


class AtiyahError(Exception):
    """Base class for every error raised by the engine."""


class NotInvertible(AtiyahError, ZeroDivisionError):
    pass


class DivByZero(AtiyahError, ZeroDivisionError):
    pass


class UnknownVariable(AtiyahError):
    pass


class VarSetMismatch(AtiyahError):
    pass


class SingularSubstitution(AtiyahError):
    pass


class UnsupportedDenominator(AtiyahError):
    """Raised when an exact Laurent/torus computation cannot decide the
    expansion region; callers fall back to numeric quadrature."""


class NumericPole(AtiyahError):
    pass


class NonConvergent(AtiyahError):
    pass


class DegreeError(AtiyahError):
    pass


class SingularFrameChange(AtiyahError):
    pass


class DegenerateFrame(AtiyahError):
    pass


class NotTangent(AtiyahError):
    """A distribution generator is not tangent to the submanifold."""


class MissingTransition(AtiyahError):
    pass


class CoverMismatch(AtiyahError):
    pass


class ZeroFunction(AtiyahError):
    pass


class ScenarioError(AtiyahError):
    pass


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class UnresolvedReference(ScenarioError):
    def __init__(self, name, context=""):
        self.name = name
        msg = f"unresolved reference {name!r}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class SchemaError(ScenarioError):
    pass

class LienardError(Exception):
    """
    Base class of every error raised by lienard_sym.
    """


class ExprSyntaxError(LienardError, ValueError):
    """
    The input text does not follow the expression grammar.

    :param message: human readable description
    :param position: character offset of the offending token
    :param expected: tokens that would have been accepted at that position
    """

    def __init__(self, message: str, position: int, expected=()):
        self.position = position
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} at position {position} (expected {', '.join(self.expected)})"
        else:
            message = f"{message} at position {position}"
        super().__init__(message)


class UnknownSymbol(LienardError, ValueError):
    """
    An identifier that is neither the variable, a declared constant, exp nor log.
    """

    def __init__(self, name: str, position: int = -1):
        self.name = name
        self.position = position
        where = f" at position {position}" if position >= 0 else ""
        super().__init__(f"UnknownSymbol({name!r}){where}")


class DomainError(LienardError, ArithmeticError):
    """
    Evaluation left the real domain of the expression.
    """


class UnboundSymbol(LienardError, KeyError):
    """
    Evaluation reached a symbol with no binding.
    """

    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"UnboundSymbol({self.name!r})"


class CannotIntegrate(LienardError):
    """
    The antiderivative lies outside the integration rule base.
    """


class DegenerateForce(LienardError, ValueError):
    """
    The pulled-back force or its derivative vanishes identically.
    """


class ParameterExtractionFailure(LienardError):
    """
    Power-law parameters could not be read off the pulled-back force.
    """


class PullbackUnavailable(LienardError):
    """
    A generator cannot be written in the original coordinates.
    """


class InconclusiveClassification(LienardError):
    """
    Some decision of the classifier came out Unknown.

    :param report: the partial report, carrying the decision trace
    """

    def __init__(self, report):
        self.report = report
        super().__init__(f"classification inconclusive, reporting {report.case.name}")


class PoleEncountered(LienardError):
    """
    A trajectory reached a singularity of the equation.

    :param trajectory: the trajectory up to the last finite state
    """

    def __init__(self, trajectory, message: str = "pole encountered"):
        self.trajectory = trajectory
        super().__init__(message)


class QuadratureFailure(LienardError):
    """
    Adaptive quadrature did not converge.
    """

"""Exception hierarchy.

Input errors map to CLI exit code 2, verification/solver failures to 1.
"""


class EcplabError(Exception):
    pass


class InputError(EcplabError):
    """Bad configuration, parameters, or input files."""


class VerificationFailure(EcplabError):
    """A numerical check or solve did not meet its target."""


class OutOfRangeT(InputError):
    pass


class NoBracketedRoot(EcplabError):
    pass


class TooFewSamples(InputError):
    pass


class SandwichViolated(VerificationFailure):
    pass


class OnZeroSet(InputError):
    pass


class DegenerateTriangle(VerificationFailure):
    pass


class PointOutside(InputError):
    pass


class MeshFormatError(InputError):
    pass


class NoGroupTables(InputError):
    pass


class SolverStagnation(VerificationFailure):
    pass


class WindowNotFound(VerificationFailure):
    pass


class UnknownFigure(InputError):
    pass

"""Exception types raised across the package."""


class MagsumError(Exception):
    """Base class for every error raised by magsum."""


class SingularMap(MagsumError, ValueError):
    pass


class OrderTooLow(MagsumError, ValueError):
    pass


class TraceNotZero(MagsumError, ValueError):
    pass


class NotUnitVector(MagsumError, ValueError):
    pass


class DegenerateDomain(MagsumError, ValueError):
    pass


class NoEigenvalues(MagsumError, ValueError):
    pass


class InvalidPlanck(MagsumError, ValueError):
    pass


class MeshTooCoarse(MagsumError, ValueError):
    pass


class ZeroTrialFunction(MagsumError, ValueError):
    pass


class TooManyEigenvalues(MagsumError, ValueError):
    pass


class SymmetryRequired(MagsumError, ValueError):
    pass


class SolverDidNotConverge(MagsumError, RuntimeError):
    """Iterative eigensolver hit its iteration cap.

    ``eigenvalues`` and ``residual_norms`` hold the last iterate so callers
    can inspect how far the solve got.
    """

    def __init__(self, message, eigenvalues=None, residual_norms=None, iterations=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residual_norms = residual_norms
        self.iterations = iterations

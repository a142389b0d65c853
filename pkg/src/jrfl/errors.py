"""Exception hierarchy shared by every module of the package."""


class JRFLError(Exception):
    """Base class for all package errors."""


class PrecisionExhausted(JRFLError, ArithmeticError):
    """A decision needs coefficients beyond the tracked precision."""


class DivisionByZero(JRFLError, ZeroDivisionError):
    """Division by a scalar that is exactly zero."""


class SingularMatrix(JRFLError, ArithmeticError):
    """A matrix expected to be invertible is singular."""


class RankDeficient(JRFLError, ValueError):
    """Generators do not span a full-rank lattice."""


class ConstraintUnsatisfiable(JRFLError, RuntimeError):
    """Random sampling could not meet the requested constraints."""


class NotIntegral(JRFLError, ValueError):
    """A coordinate that must lie in the valuation ring does not."""


class NoSolution(JRFLError, ArithmeticError):
    """A linear system that should be uniquely solvable is not."""


class NotInSymmetricSpace(JRFLError, ValueError):
    """The matrix A does not satisfy A * conj(A) = 1."""


class NotSRS(JRFLError, ValueError):
    """The input is not strongly regular semisimple."""


class MembershipFailed(JRFLError, ValueError):
    """The element does not lie in the requested group."""


class SumMismatch(JRFLError, ValueError):
    """Two coweights with different total sums were compared."""


class NotSigmaOutFixed(JRFLError, ValueError):
    """The coweight is not fixed by the outer involution."""


class StratumOutOfRange(JRFLError, ValueError):
    """A Cartan stratum lies outside the closure of the boundary stratum."""


class Unstable(JRFLError, RuntimeError):
    """A count changed when the search bound was enlarged."""


class RankUnsupported(JRFLError, NotImplementedError):
    """The requested route is only implemented in small rank."""


class ConfigError(JRFLError, ValueError):
    """Invalid command-line or configuration-file settings."""

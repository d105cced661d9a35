"""Exception hierarchy shared by all solver layers."""


class JDiscError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 3


class ConversionDomainError(JDiscError):
    """J or A lies outside the domain of the Cayley-type correspondence."""


class TamingError(JDiscError):
    """A structure that must be tamed by the standard form is not."""


class FieldConstructionError(JDiscError):
    """Matrix-field parameters violate the taming bound or support rule."""

    exit_code = 2


class TruncationError(JDiscError):
    """An operation would produce a polynomial above the truncation degree."""


class DegeneracyError(JDiscError):
    """A boundary loop passes too close to the origin to carry a winding number."""


class BoundaryMismatchError(JDiscError):
    """A disc boundary does not lie on the requested torus."""


class ImmersionError(JDiscError):
    """A sampled parametrized surface fails to be an immersion."""


class ScaleError(JDiscError):
    """The dilation budget was exhausted before the norm bound was reached."""


class DivergenceError(JDiscError):
    """A fixed-point or Newton iteration diverged."""

    def __init__(self, message, ratio=None, history=None):
        super().__init__(message)
        self.ratio = ratio
        self.history = list(history or [])


class NonConvergenceError(JDiscError):
    """The iteration cap was reached before the tolerance was met."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class LopatinskiError(JDiscError):
    """det P vanishes (numerically) on the boundary circle."""


class ResolutionError(JDiscError):
    """A discrete quantity did not stabilize under refinement."""


class ObstructionError(JDiscError):
    """A linear Riemann-Hilbert problem is not solvable to tolerance.

    ``direction`` holds the best-fit cokernel direction (boundary samples of
    the unexplained right-hand side).
    """

    def __init__(self, message, residual=None, direction=None):
        super().__init__(message)
        self.residual = residual
        self.direction = direction


class ContinuationBreakdown(JDiscError):
    """Step size underflow during homotopy continuation."""

    def __init__(self, message, trace=None, diagnostic=None):
        super().__init__(message)
        self.trace = trace
        self.diagnostic = diagnostic


class SeparationAlarm(JDiscError):
    """A traced disc approached the hyperplanes {w_j = 0}."""

    exit_code = 4


class FoliationAlarm(JDiscError):
    """Two discs of a foliation sweep intersect on the evaluation grid."""

    exit_code = 4

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class BoundednessAlarm(JDiscError):
    """Free torus radii drifted to zero or infinity."""

    exit_code = 4


class DemoSetupError(JDiscError):
    """The non-squeezing demonstration was given inconsistent data."""

    exit_code = 2


class ConfigError(JDiscError):
    """Configuration text failed to parse or validate."""

    exit_code = 2

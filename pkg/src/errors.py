"""
Exception hierarchy for curvekit.

Validation-type failures derive from ValueError and map to exit status 2;
numerical non-convergence derives from RuntimeError and maps to exit status 3.
"""
from typing import Any, List, Optional, Sequence, Tuple


class CurveKitError(Exception):
    """Base class for all curvekit errors"""

    exit_code = 2


# ---------------------------------------------------------------------------
# Input and model errors
# ---------------------------------------------------------------------------

class SchemaError(CurveKitError, ValueError):
    """Spec document does not match the curve/family schema"""


class ParseError(CurveKitError, ValueError):
    """Expression text could not be parsed"""

    def __init__(self, message: str, offset: int, expected: Sequence[str] = ()):
        self.offset = offset
        self.expected: List[str] = list(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifier(ParseError):
    """Identifier outside the supported variables and functions"""

    def __init__(self, name: str, offset: int, expected: Sequence[str] = ()):
        self.name = name
        super().__init__(f"unknown identifier '{name}'", offset, expected)


# ---------------------------------------------------------------------------
# Jet arithmetic
# ---------------------------------------------------------------------------

class DegreeMismatch(CurveKitError, ValueError):
    """Binary jet operation on unequal degrees"""


class BasepointMismatch(DegreeMismatch):
    """Binary jet operation on jets taken at different basepoints"""


class DivisionByZeroSeries(CurveKitError, ValueError):
    """Division by a series whose constant term is numerically zero"""


class DomainError(CurveKitError, ValueError):
    """Elementary function applied outside its domain"""


class CompositionBasepointError(CurveKitError, ValueError):
    """Inner series of a composition has a non-zero constant term"""


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

class _MagnitudeError(CurveKitError, ValueError):
    """Error that reports the offending magnitude"""

    def __init__(self, message: str, magnitude: float, t: Optional[float] = None):
        self.magnitude = float(magnitude)
        self.t = t
        where = f" at t={t:.17g}" if t is not None else ""
        super().__init__(f"{message}{where}: magnitude {self.magnitude:.3e}")


class RegularityError(_MagnitudeError):
    """|γ′| below tolerance"""

    def __init__(self, magnitude: float, t: Optional[float] = None):
        super().__init__("curve is not regular", magnitude, t)


class InflectionError(_MagnitudeError):
    """|γ′×γ″| below tolerance"""

    def __init__(self, magnitude: float, t: Optional[float] = None):
        super().__init__("curve has an inflection", magnitude, t)


class ZeroTorsion(_MagnitudeError):
    """Torsion vanishes where a non-zero value is required"""

    def __init__(self, magnitude: float, t: Optional[float] = None):
        super().__init__("torsion vanishes", magnitude, t)


class NonUnitDirection(CurveKitError, ValueError):
    """Height direction is not a unit vector"""


class InconsistentDegrees(CurveKitError, ValueError):
    """Jets handed to the versality test do not share degree/basepoint"""


class NotAFlattening(CurveKitError, ValueError):
    pass


class NotAVertex(CurveKitError, ValueError):
    pass


class NotATwisting(CurveKitError, ValueError):
    pass


class DegenerateDelta(CurveKitError, ValueError):
    pass


# ---------------------------------------------------------------------------
# Strata and bifurcation
# ---------------------------------------------------------------------------

class NoCuspAtOrigin(CurveKitError, ValueError):
    """s=0 slice of a family has no space cusp in its t-range"""


class FrameAdaptationError(CurveKitError, ValueError):
    """Cusp cannot be rotated into the adapted normal-form frame"""


class NotGeneric(CurveKitError, ValueError):
    """Family fails the FRS-genericity test required for model comparison"""


class InsufficientPoints(CurveKitError, ValueError):
    """Not enough locus points near the origin to fit a tangent"""


class EmptyPlot(CurveKitError, ValueError):
    """Nothing drawable handed to the SVG renderer"""


# ---------------------------------------------------------------------------
# Numerical failures
# ---------------------------------------------------------------------------

class NonConvergence(CurveKitError, RuntimeError):
    """Root refinement failed inside a bracket"""

    exit_code = 3

    def __init__(self, message: str, bracket: Optional[Tuple[float, float]] = None):
        self.bracket = bracket
        if bracket is not None:
            message = f"{message} in [{bracket[0]:.17g}, {bracket[1]:.17g}]"
        super().__init__(message)


class LostTrack(NonConvergence):
    """Tracked feature root left its t-window during continuation"""

    def __init__(self, message: str, last_good_s: Any = None):
        self.last_good_s = last_good_s
        if last_good_s is not None:
            message = f"{message}; last good s=({last_good_s[0]:.6g}, {last_good_s[1]:.6g})"
        super().__init__(message)

"""Exception types raised by the weakps library.

Each class marks one well-defined failure mode of the numerical pipeline,
so callers (and the CLI) can distinguish "your input is outside the model"
from genuine bugs.
"""


class WeakpsError(Exception):
    """Base class for all weakps errors."""


class ZeroStrength(WeakpsError):
    """Measurement strength is zero; the rescaled value is undefined."""


class ZeroPostselection(WeakpsError):
    """Postselection probability is numerically zero; conditioning impossible."""


class DegenerateConditional(WeakpsError):
    """A conditional outcome probability vanishes; Fisher information undefined."""


class SaturatedWeakValue(WeakpsError):
    """The scaled weak value sits on the +-1 boundary; the closed-form
    information expression has a pole there."""


class OrthogonalPostselection(WeakpsError):
    """Preparation and postselection states are orthogonal (p_phi = 0)."""


class EmptyGrid(WeakpsError):
    """A scan grid is empty, or every point was skipped."""


class GateStarved(WeakpsError):
    """Coincidence probability through the lossy gate is numerically zero."""


class EmptyChannel(WeakpsError):
    """Both counts of a postselection channel pair are zero."""


class OutOfRange(WeakpsError):
    """Measured value lies outside the calibration branch's range."""


class AmbiguousBranch(WeakpsError):
    """Requested inversion branch spans a turning point of the curve."""


class FlatCurve(WeakpsError):
    """Calibration curve slope vanishes; variance propagation is singular."""


class ConfigError(WeakpsError):
    """Invalid CLI flags or configuration file contents."""

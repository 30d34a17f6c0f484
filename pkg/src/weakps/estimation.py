"""Angle estimation by inverting the postselected-value calibration curve,
with variance propagation and comparison against the Cramér-Rao limit of the
postselected events.

Inversion uses the exact model curve with bracketed root finding on a caller
chosen monotone branch (the curve is not injective over a quarter turn, so
branch selection is explicit).  Reported variances are in squared degrees;
all internal information quantities stay in inverse squared radians, with the
unit conversion applied exactly once here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
from scipy.optimize import brentq

from .counting import AcquisitionConfig, derive_seeds, simulate_counts, weak_value_from_counts
from .errors import AmbiguousBranch, FlatCurve, OutOfRange, WeakpsError
from .imperfections import ImperfectionParams, imperfect_joint_probs
from .states import (
    ProbabilityRecord,
    Strength,
    as_strength,
    conditional_probabilities,
    ideal_probability_record,
    sign_factor,
)
from .weak import (
    QUANTUM_FISHER_INFORMATION,
    fisher_ps_definition,
    postselect_probability,
    weak_value,
    weak_value_curve,
    weak_value_slope,
)

__all__ = [
    "RAD2_TO_DEG2",
    "TABLE1_THETAS_DEG",
    "ModelParams",
    "CalibrationCurve",
    "EstimateResult",
    "Table1Row",
    "build_calibration",
    "estimate_theta",
    "propagate_variance",
    "cramer_rao_variance",
    "table1_pipeline",
    "load_baseline",
]

RAD2_TO_DEG2 = (180.0 / math.pi) ** 2

# The eight working points of the estimation comparison, per postselection.
TABLE1_THETAS_DEG = {
    "minus": (20.0, 22.5, 25.0, 27.5),
    "plus": (67.5, 70.0, 72.5, 75.0),
}

_SLOPE_FLOOR = 1e-9
_FD_STEP = 1e-6  # central-difference step for curves without a closed form


@dataclass(frozen=True)
class ModelParams:
    """What generated (or is assumed to generate) the measured values."""

    kappa: float
    postselect_sign: str
    imperfections: ImperfectionParams | None = None

    def __post_init__(self) -> None:
        as_strength(self.kappa)
        sign_factor(self.postselect_sign)

    @property
    def mu(self) -> float:
        """Meter angle realizing the nominal strength."""
        return math.asin(self.kappa) / 4.0

    def probability_record(self, theta: float) -> ProbabilityRecord:
        if self.imperfections is None:
            return ideal_probability_record(theta, self.kappa)
        return imperfect_joint_probs(theta, self.mu, self.imperfections)

    def sigma(self, theta: float) -> float:
        """Model postselected value at ``theta`` (nominal-kappa rescaling)."""
        if self.imperfections is None:
            return weak_value_curve(theta, self.kappa, self.postselect_sign)
        record = self.probability_record(theta)
        pc0, pc1 = conditional_probabilities(*record.postselected(self.postselect_sign))
        return weak_value(pc0, pc1, self.kappa)

    def sigma_slope(self, theta: float) -> float:
        """Angle derivative of the model curve; analytic for the ideal model,
        central differences otherwise."""
        if self.imperfections is None:
            return weak_value_slope(theta, self.kappa, self.postselect_sign)
        return (self.sigma(theta + _FD_STEP) - self.sigma(theta - _FD_STEP)) / (2.0 * _FD_STEP)


@dataclass(frozen=True)
class CalibrationCurve:
    """Tabulated model curve linking the postselected value to the angle.

    The grid is for bracketing and branch bookkeeping only; evaluation always
    goes through the exact model.
    """

    theta_grid: np.ndarray
    sigma_values: np.ndarray
    model: ModelParams

    def __post_init__(self) -> None:
        grid = np.ascontiguousarray(self.theta_grid, dtype=np.float64)
        values = np.ascontiguousarray(self.sigma_values, dtype=np.float64)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("theta_grid must hold at least two angles")
        if values.shape != grid.shape:
            raise ValueError("sigma_values must match theta_grid in shape")
        if not np.all(np.diff(grid) > 0.0):
            raise ValueError("theta_grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("sigma_values must be finite")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "theta_grid", grid)
        object.__setattr__(self, "sigma_values", values)

    def evaluate(self, theta: float) -> float:
        return self.model.sigma(theta)

    def slope(self, theta: float) -> float:
        return self.model.sigma_slope(theta)

    def branches(self) -> list[tuple[int, int]]:
        """Index ranges [i, j] of maximal monotone runs of the tabulated curve."""
        diffs = np.sign(np.diff(self.sigma_values))
        runs: list[tuple[int, int]] = []
        start = 0
        current = diffs[0]
        for i in range(1, diffs.size):
            if diffs[i] != current and diffs[i] != 0.0:
                if current == 0.0:
                    current = diffs[i]
                    continue
                runs.append((start, i))
                start = i
                current = diffs[i]
        runs.append((start, diffs.size))
        return runs

    def branch_containing(self, theta: float) -> tuple[float, float]:
        """Angle interval of the monotone branch containing ``theta``.

        Interior branch endpoints are tabulated turning points; the true
        extremum lies within one grid cell of them, so those endpoints are
        pulled in by one cell to guarantee the returned interval is strictly
        monotone in the exact model.
        """
        grid = self.theta_grid
        last = grid.size - 1
        if not grid[0] <= theta <= grid[-1]:
            raise OutOfRange(f"theta = {theta!r} outside the tabulated range")
        for i, j in self.branches():
            lo_idx = i if i == 0 else i + 1
            hi_idx = j if j == last else j - 1
            if lo_idx < hi_idx and grid[lo_idx] <= theta <= grid[hi_idx]:
                return float(grid[lo_idx]), float(grid[hi_idx])
        raise AmbiguousBranch(
            f"theta = {theta!r} sits within one grid cell of a curve turning point"
        )


def build_calibration(
    model: ModelParams, theta_start: float, theta_stop: float, step: float
) -> CalibrationCurve:
    """Tabulate the model curve on [theta_start, theta_stop] with the given
    step (radians) and index its monotone branches."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    if theta_stop <= theta_start:
        raise ValueError("theta range must be non-empty")
    n = int(round((theta_stop - theta_start) / step))
    grid = theta_start + step * np.arange(n + 1)
    values = np.array([model.sigma(float(t)) for t in grid])
    return CalibrationCurve(theta_grid=grid, sigma_values=values, model=model)


def _assert_monotone(curve: CalibrationCurve, lo: float, hi: float, samples: int = 65) -> None:
    probe = np.linspace(lo, hi, samples)
    values = np.array([curve.evaluate(float(t)) for t in probe])
    d = np.diff(values)
    if np.any(d > 0.0) and np.any(d < 0.0):
        raise AmbiguousBranch(
            f"curve is not monotone on [{lo!r}, {hi!r}]; it spans a turning point"
        )


def estimate_theta(
    curve: CalibrationCurve, sigma_measured: float, branch: tuple[float, float]
) -> float:
    """Invert the calibration curve on a monotone branch.

    Raises OutOfRange when the measured value falls outside the branch's
    value range and AmbiguousBranch when the branch spans a turning point.
    Root is bracketed and polished to 1e-12 radians.
    """
    lo, hi = float(branch[0]), float(branch[1])
    if hi <= lo:
        raise ValueError("branch must be a non-empty interval (lo, hi)")
    _assert_monotone(curve, lo, hi)
    f_lo = curve.evaluate(lo) - sigma_measured
    f_hi = curve.evaluate(hi) - sigma_measured
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise OutOfRange(
            f"sigma = {sigma_measured!r} outside branch range "
            f"[{min(curve.evaluate(lo), curve.evaluate(hi))!r}, "
            f"{max(curve.evaluate(lo), curve.evaluate(hi))!r}]"
        )
    return float(brentq(lambda t: curve.evaluate(t) - sigma_measured, lo, hi, xtol=1e-12))


def propagate_variance(curve: CalibrationCurve, theta_hat: float, variance_sigma: float) -> float:
    """First-order variance of the angle estimate, in squared degrees:
    ``var(sigma) / (d sigma / d theta)^2`` at the estimate.

    Raises FlatCurve at curve extrema where the propagation is singular.
    """
    if variance_sigma < 0.0:
        raise ValueError("variance must be nonnegative")
    slope = curve.slope(theta_hat)
    if abs(slope) < _SLOPE_FLOOR:
        raise FlatCurve(f"curve slope {slope!r} at theta = {theta_hat!r} is numerically zero")
    return variance_sigma / (slope * slope) * RAD2_TO_DEG2


def cramer_rao_variance(
    theta: float, s: "Strength | float", postselect_sign: str, m_ps: int
) -> float:
    """Cramér-Rao limit ``1 / (F_ps * m_ps)`` for ``m_ps`` postselected
    events, reported in squared degrees."""
    if m_ps <= 0:
        raise ValueError("m_ps must be positive")
    f_ps = fisher_ps_definition(theta, s, postselect_sign)
    return 1.0 / (f_ps * m_ps) * RAD2_TO_DEG2


@dataclass(frozen=True)
class EstimateResult:
    """One estimation run: the angle estimate and its error budget."""

    theta_hat_deg: float
    variance_theta_deg2: float
    sigma_cr_deg2: float
    f_ps: float
    m_ps: int
    postselect_sign: str

    def __post_init__(self) -> None:
        if self.variance_theta_deg2 < 0.0:
            raise ValueError("variance must be nonnegative")
        if self.sigma_cr_deg2 <= 0.0:
            raise ValueError("Cramér-Rao variance must be positive")


@dataclass(frozen=True)
class Table1Row:
    """All repetitions of one working point, failures included."""

    theta_deg: float
    postselect_sign: str
    estimates: tuple[EstimateResult, ...]
    failures: tuple[str, ...]

    @property
    def n_ok(self) -> int:
        return len(self.estimates)

    @property
    def mean_theta_hat_deg(self) -> float:
        if not self.estimates:
            return math.nan
        return float(np.mean([e.theta_hat_deg for e in self.estimates]))

    @property
    def mean_variance_deg2(self) -> float:
        if not self.estimates:
            return math.nan
        return float(np.mean([e.variance_theta_deg2 for e in self.estimates]))

    @property
    def empirical_variance_deg2(self) -> float:
        if len(self.estimates) < 2:
            return math.nan
        return float(np.var([e.theta_hat_deg for e in self.estimates], ddof=1))

    @property
    def mean_sigma_cr_deg2(self) -> float:
        if not self.estimates:
            return math.nan
        return float(np.mean([e.sigma_cr_deg2 for e in self.estimates]))

    @property
    def mean_m_ps(self) -> float:
        if not self.estimates:
            return math.nan
        return float(np.mean([e.m_ps for e in self.estimates]))


def _estimate_once(
    curve: CalibrationCurve,
    probs: ProbabilityRecord,
    config: AcquisitionConfig,
    branch: tuple[float, float],
    model: ModelParams,
) -> EstimateResult:
    counts = simulate_counts(probs, config)
    sigma_hat, var_sigma = weak_value_from_counts(counts, model.kappa, model.postselect_sign)
    theta_hat = estimate_theta(curve, sigma_hat, branch)
    var_theta = propagate_variance(curve, theta_hat, var_sigma)
    n_a, n_b = counts.postselected(model.postselect_sign)
    m_ps = n_a + n_b
    f_ps = fisher_ps_definition(theta_hat, model.kappa, model.postselect_sign)
    sigma_cr = 1.0 / (f_ps * m_ps) * RAD2_TO_DEG2
    budget = f_ps * postselect_probability(theta_hat, model.kappa, model.postselect_sign)
    if budget > QUANTUM_FISHER_INFORMATION + 1e-9:
        raise RuntimeError(f"information budget audit failed: {budget!r} > 16")
    return EstimateResult(
        theta_hat_deg=math.degrees(theta_hat),
        variance_theta_deg2=var_theta,
        sigma_cr_deg2=sigma_cr,
        f_ps=f_ps,
        m_ps=m_ps,
        postselect_sign=model.postselect_sign,
    )


def table1_pipeline(
    theta_list_deg: "list[float] | tuple[float, ...]",
    model: ModelParams,
    acquisition: AcquisitionConfig,
    repetitions: int,
) -> list[Table1Row]:
    """Simulate, estimate, and audit every working point.

    Per angle and repetition: draw counts, estimate the postselected value
    and its variance, invert on the monotone branch containing the true
    angle, propagate the variance, and compute the Cramér-Rao comparison
    with the realized postselected event count.  Failed repetitions are
    recorded per row, never dropped silently.
    """
    if repetitions <= 0:
        raise ValueError("repetitions must be positive")
    curve = build_calibration(model, 0.0, math.pi / 2.0, math.radians(0.05))
    all_seeds = derive_seeds(acquisition.seed, len(theta_list_deg) * repetitions)
    rows: list[Table1Row] = []
    for row_index, theta_deg in enumerate(theta_list_deg):
        theta = math.radians(theta_deg)
        probs = model.probability_record(theta)
        branch = curve.branch_containing(theta)
        seeds = all_seeds[row_index * repetitions : (row_index + 1) * repetitions]
        estimates: list[EstimateResult] = []
        failures: list[str] = []
        for i, seed in enumerate(seeds):
            config = replace(acquisition, seed=seed)
            try:
                estimates.append(_estimate_once(curve, probs, config, branch, model))
            except WeakpsError as exc:
                failures.append(f"rep {i}: {type(exc).__name__}: {exc}")
        rows.append(
            Table1Row(
                theta_deg=float(theta_deg),
                postselect_sign=model.postselect_sign,
                estimates=tuple(estimates),
                failures=tuple(failures),
            )
        )
    return rows


def load_baseline(path: "str | None" = None) -> dict[tuple[str, float], tuple[float, float]]:
    """Published comparison values keyed by (postselect_sign, theta_deg),
    each entry (measured variance, Cramér-Rao variance) in squared degrees.

    These are reference labels for side-by-side reporting only; the pipeline
    makes no claim of reproducing them (the underlying count rates are not
    public).
    """
    if path is None:
        text = resources.files("weakps").joinpath("data/table1_baseline.csv").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    out: dict[tuple[str, float], tuple[float, float]] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("postselect"):
            continue
        sign, theta, var, cr = line.split(",")
        out[(sign.strip(), float(theta))] = (float(var), float(cr))
    return out

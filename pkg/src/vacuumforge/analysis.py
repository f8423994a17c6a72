"""Post-processing: decay-to-asymptote series, exponential fits, peak finding.

The vacuum-decay measure for a pair-number probability is
d_n(T) = |C_n(inf) - C_n(T)|.  The asymptote C_n(inf) is estimated from the
tail of the simulated series unless the caller supplies a better value.
Peak extraction serves the momentum and position spectra: local maxima with
parabolic sub-lattice refinement and half-widths at half maximum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ContractViolationError

PROBABILITY_SLACK = 1e-9
MIN_SAMPLES = 5
SPAN_FACTOR = 3.0
TAIL_FRACTION = 0.10
TAIL_WOBBLE_LIMIT = 0.05
TRANSIENT_FRACTION = 0.20
FLOOR_D = 1e-12


@dataclass(frozen=True)
class DecaySeries:
    """Ordered (T, C_n) samples for one pair number plus asymptote estimate.

    d(T) = |c_infinity - C(T)| is the residual vacuum-decay distance.  When
    the tail of the series still wobbles by more than TAIL_WOBBLE_LIMIT the
    asymptote estimate is flagged unreliable; fits should not trust it.
    """

    T: np.ndarray
    C: np.ndarray
    n: int
    c_infinity: float
    unreliable: bool

    def __post_init__(self):
        object.__setattr__(self, "T", np.asarray(self.T, dtype=float))
        object.__setattr__(self, "C", np.asarray(self.C, dtype=float))
        if self.T.ndim != 1 or self.T.shape != self.C.shape:
            raise ConfigError("decay series needs matching 1-d T and C arrays")
        if self.T.size < MIN_SAMPLES:
            raise ConfigError(
                f"decay series needs at least {MIN_SAMPLES} samples, "
                f"got {self.T.size}"
            )
        if not np.all(np.diff(self.T) > 0.0):
            raise ConfigError("decay series T values must strictly increase")
        if self.T[-1] < SPAN_FACTOR * self.T[0]:
            raise ConfigError(
                "decay series span too short: largest T must be at least "
                f"{SPAN_FACTOR}x the smallest"
            )
        if np.min(self.C) < -PROBABILITY_SLACK or \
                np.max(self.C) > 1.0 + PROBABILITY_SLACK:
            raise ConfigError("decay series C values must lie in [0, 1]")

    @property
    def d(self) -> np.ndarray:
        return np.abs(self.c_infinity - self.C)


def decay_series(T: Sequence[float], C: Sequence[float], n: int,
                 c_infinity: Optional[float] = None) -> DecaySeries:
    """Build a DecaySeries, estimating the asymptote from the tail.

    The estimate is the mean of the last 10% of samples (at least one).
    Pass c_infinity explicitly when a better asymptote is known; the
    tail-wobble reliability check still runs either way.
    """
    T = np.asarray(T, dtype=float)
    C = np.asarray(C, dtype=float)
    k = max(1, int(round(TAIL_FRACTION * T.size)))
    tail = C[-k:]
    wobble = float(np.max(tail) - np.min(tail)) if k > 1 else 0.0
    est = float(np.mean(tail)) if c_infinity is None else float(c_infinity)
    return DecaySeries(T, C, int(n), est, wobble > TAIL_WOBBLE_LIMIT)


@dataclass(frozen=True)
class FitResult:
    gamma: float
    log_intercept: float
    residual: float
    window: Tuple[float, float]
    n_points: int


def fit_exponential(series: DecaySeries,
                    window: Optional[Tuple[float, float]] = None) -> FitResult:
    """Least-squares slope of ln d(T) over a window; returns the decay rate.

    The default window drops the first 20% of samples (turn-on transients)
    and the tail used for the asymptote estimate.  Samples with
    d <= 1e-12 are unusable; fewer than 4 usable points is an error.
    """
    T = series.T
    d = series.d
    if window is None:
        lo = int(np.ceil(TRANSIENT_FRACTION * T.size))
        hi = T.size - max(1, int(round(TAIL_FRACTION * T.size)))
        if hi <= lo:
            raise ConfigError("decay series too short for the default window")
        window = (float(T[lo]), float(T[hi - 1]))
    t_lo, t_hi = float(window[0]), float(window[1])
    mask = (T >= t_lo) & (T <= t_hi) & (d > FLOOR_D)
    if int(np.count_nonzero(mask)) < 4:
        raise ConfigError(
            "fewer than 4 usable decay samples in the fit window "
            f"[{t_lo}, {t_hi}]"
        )
    t = T[mask]
    y = np.log(d[mask])
    design = np.stack([t, np.ones_like(t)], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    return FitResult(gamma=-slope, log_intercept=intercept, residual=resid,
                     window=(t_lo, t_hi), n_points=int(t.size))


@dataclass(frozen=True)
class Peak:
    """One refined local maximum; location has one entry per table axis."""

    location: Tuple[float, ...]
    height: float
    half_width: Tuple[float, ...]


@dataclass(frozen=True)
class PeakList:
    peaks: Tuple[Peak, ...]
    axes_ranges: Tuple[Tuple[float, float], ...] = field(repr=False)

    def __post_init__(self):
        for p in self.peaks:
            if not p.height > 0.0:
                raise ContractViolationError("peak heights must be positive")
            for c, (lo, hi) in zip(p.location, self.axes_ranges):
                if not lo <= c <= hi:
                    raise ContractViolationError(
                        f"peak location {c} outside axis range [{lo}, {hi}]"
                    )

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def strongest(self, k: int) -> Tuple[Peak, ...]:
        ranked = sorted(self.peaks, key=lambda p: p.height, reverse=True)
        return tuple(ranked[:k])


def _parabolic_offset(y_left: float, y_mid: float, y_right: float) -> float:
    # Vertex of the parabola through three equispaced samples, in units of
    # the sample spacing; degenerate (flat) triples stay at the center.
    denom = y_left - 2.0 * y_mid + y_right
    if denom == 0.0:
        return 0.0
    off = 0.5 * (y_left - y_right) / denom
    return float(np.clip(off, -0.5, 0.5))


def _half_crossing(x: np.ndarray, y: np.ndarray, i: int, half: float,
                   step: int) -> float:
    """Distance from x[i] to the interpolated y = half crossing going step-wise."""
    j = i
    while 0 <= j + step < y.size and y[j + step] > half:
        j += step
    k = j + step
    if k < 0 or k >= y.size:
        return abs(float(x[j] - x[i]))
    frac = (y[j] - half) / (y[j] - y[k])
    return abs(float(x[j] + frac * (x[k] - x[j]) - x[i]))


def find_peaks(x: Sequence[float], values: Sequence[float],
               min_height: float = 0.1) -> PeakList:
    """Interior local maxima above min_height times the global maximum.

    Locations get parabolic sub-lattice refinement; widths are half-widths
    at half maximum (boundary-limited when the table ends first).  The
    result is invariant under positive rescaling of the table.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size == 0:
        raise ConfigError("peak search needs matching nonempty 1-d arrays")
    top = float(np.max(y))
    if top <= 0.0:
        return PeakList((), ((float(x[0]), float(x[-1])),))
    cut = min_height * top
    peaks = []
    for i in range(1, y.size - 1):
        if y[i] > y[i - 1] and y[i] > y[i + 1] and y[i] >= cut:
            off = _parabolic_offset(y[i - 1], y[i], y[i + 1])
            loc = float(x[i] + off * (x[i + 1] - x[i - 1]) * 0.5)
            height = float(y[i] - 0.25 * (y[i - 1] - y[i + 1]) * off)
            half = 0.5 * height
            w = 0.5 * (_half_crossing(x, y, i, half, -1)
                       + _half_crossing(x, y, i, half, +1))
            peaks.append(Peak((loc,), height, (float(w),)))
    return PeakList(tuple(peaks), ((float(x[0]), float(x[-1])),))


def find_peaks_2d(x1: Sequence[float], x2: Sequence[float],
                  table: np.ndarray, min_height: float = 0.1) -> PeakList:
    """Strict 8-neighbor local maxima of a 2-d table, refined per axis."""
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    z = np.asarray(table, dtype=float)
    if z.shape != (a.size, b.size):
        raise ConfigError(
            f"table shape {z.shape} does not match axes ({a.size}, {b.size})"
        )
    top = float(np.max(z))
    ranges = ((float(a[0]), float(a[-1])), (float(b[0]), float(b[-1])))
    if top <= 0.0:
        return PeakList((), ranges)
    cut = min_height * top
    peaks = []
    for i in range(1, a.size - 1):
        for j in range(1, b.size - 1):
            v = z[i, j]
            if v < cut:
                continue
            block = z[i - 1:i + 2, j - 1:j + 2]
            if v <= np.max(np.delete(block.ravel(), 4)):
                continue
            off_i = _parabolic_offset(z[i - 1, j], v, z[i + 1, j])
            off_j = _parabolic_offset(z[i, j - 1], v, z[i, j + 1])
            loc = (float(a[i] + off_i * (a[i + 1] - a[i - 1]) * 0.5),
                   float(b[j] + off_j * (b[j + 1] - b[j - 1]) * 0.5))
            half = 0.5 * v
            w1 = 0.5 * (_half_crossing(a, z[:, j], i, half, -1)
                        + _half_crossing(a, z[:, j], i, half, +1))
            w2 = 0.5 * (_half_crossing(b, z[i, :], j, half, -1)
                        + _half_crossing(b, z[i, :], j, half, +1))
            peaks.append(Peak(loc, float(v), (float(w1), float(w2))))
    return PeakList(tuple(peaks), ranges)

"""Uniform-grid sample paths and the quadrature primitives built on them.

Every functional observation lives on a uniform grid over [0, 1] and is
anchored so its value at tau = 0 is zero.  Two quadrature conventions are
used throughout and must not be mixed:

* node-valued integrands (one sample per grid node, length ``n_points``)
  are integrated with the trapezoid rule;
* derivative-valued integrands (one sample per grid interval, length
  ``n_points - 1``) are integrated with the plain Riemann sum
  ``step * sum``.

The pairing makes the discrete fundamental theorem exact: integrating the
forward-difference derivative of a path recovers ``path(1) - path(0)``
bit for bit, which the drift reestimation formulas rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch

DEFAULT_GRID_POINTS = 201


@dataclass(frozen=True)
class Grid:
    """Uniform grid tau_k = k * step over [0, 1] with at least two nodes."""

    n_points: int

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points < 2:
            raise ValueError(f"grid needs an integer number of points >= 2, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def step(self) -> float:
        return 1.0 / (self.n_points - 1)

    @cached_property
    def taus(self) -> np.ndarray:
        taus = np.linspace(0.0, 1.0, self.n_points)
        taus.flags.writeable = False
        return taus


@dataclass(frozen=True, eq=False)
class Path:
    """A discretized sample path, anchored at value 0 at tau = 0.

    Values are immutable after construction.  Derived quantities used by the
    emission formulas (forward differences, interval midpoints and the
    recurring integrals over them) are cached on first access.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise DimensionMismatch(
                f"expected {self.grid.n_points} values, got array of shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must all be finite")
        if values[0] != 0.0:
            raise ValueError("path must be anchored: values[0] == 0")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @cached_property
    def deriv(self) -> np.ndarray:
        """Forward differences (values[k+1] - values[k]) / step, one per interval."""
        d = np.diff(self.values) / self.grid.step
        d.flags.writeable = False
        return d

    @cached_property
    def interval_means(self) -> np.ndarray:
        """Midpoint values (values[k] + values[k+1]) / 2, one per interval."""
        m = 0.5 * (self.values[:-1] + self.values[1:])
        m.flags.writeable = False
        return m

    @property
    def increment(self) -> float:
        """Total increment path(1) - path(0); equals the endpoint once anchored."""
        return float(self.values[-1] - self.values[0])

    # Interval-rule integrals that recur in the emission formulas.
    @cached_property
    def sq_deriv_integral(self) -> float:
        return float(self.grid.step * np.dot(self.deriv, self.deriv))

    @cached_property
    def mean_integral(self) -> float:
        return float(self.grid.step * np.sum(self.interval_means))

    @cached_property
    def sq_mean_integral(self) -> float:
        return float(self.grid.step * np.dot(self.interval_means, self.interval_means))

    @cached_property
    def deriv_mean_integral(self) -> float:
        return float(self.grid.step * np.dot(self.deriv, self.interval_means))


def make_path(times, raw_values, n_points: int = DEFAULT_GRID_POINTS) -> Path:
    """Normalize an irregular series onto a uniform anchored grid.

    Times are affinely rescaled to [0, 1], values are resampled by linear
    interpolation onto a uniform grid of ``n_points`` nodes, and the result
    is shifted so the first value is zero.
    """
    times = np.asarray(times, dtype=float)
    raw_values = np.asarray(raw_values, dtype=float)
    if times.ndim != 1 or raw_values.ndim != 1 or times.shape != raw_values.shape:
        raise ValueError("times and raw_values must be 1-D arrays of equal length")
    if times.size < 2:
        raise ValueError("need at least 2 samples to build a path")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    grid = Grid(n_points)
    rescaled = (times - times[0]) / (times[-1] - times[0])
    resampled = np.interp(grid.taus, rescaled, raw_values)
    return Path(grid, resampled - resampled[0])


def derivative(p: Path) -> np.ndarray:
    """Forward-difference derivative, one value per grid interval."""
    return p.deriv.copy()


def integrate(samples, grid: Grid) -> float:
    """Integrate sampled values over [0, 1].

    Node-valued samples (length ``n_points``) use the trapezoid rule;
    interval-valued samples (length ``n_points - 1``, e.g. a derivative)
    use the Riemann sum ``step * sum``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1:
        raise ValueError("samples must be a 1-D array")
    if samples.size == grid.n_points:
        return float(np.trapezoid(samples, dx=grid.step))
    if samples.size == grid.n_points - 1:
        return float(grid.step * np.sum(samples))
    raise DimensionMismatch(
        f"samples length {samples.size} matches neither {grid.n_points} nodes "
        f"nor {grid.n_points - 1} intervals"
    )


def smooth(p: Path, bandwidth: float) -> Path:
    """Gaussian-kernel smoother (Nadaraya-Watson), re-anchored at zero.

    The kernel standard deviation is ``bandwidth`` in grid time; weights are
    renormalized near the boundaries rather than reflected.
    """
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    taus = p.grid.taus
    diffs = (taus[:, None] - taus[None, :]) / bandwidth
    weights = np.exp(-0.5 * diffs * diffs)
    weights /= weights.sum(axis=1, keepdims=True)
    smoothed = weights @ p.values
    return Path(p.grid, smoothed - smoothed[0])


def sobolev_sq_distance(a: Path, b: Path, order: int = 1) -> float:
    """Squared Sobolev distance between two paths sharing a grid.

    Order 1 integrates the squared difference of first derivatives; order 2
    applies the forward difference twice and integrates over the n - 2
    interior intervals.  Both paths are anchored, so the order-1 distance is
    zero only for pointwise-equal paths.
    """
    if a.grid != b.grid:
        raise DimensionMismatch("paths live on different grids")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    step = a.grid.step
    d1 = a.deriv - b.deriv
    if order == 1:
        return float(step * np.dot(d1, d1))
    if a.grid.n_points < 3:
        raise ValueError("order 2 requires at least 3 grid points")
    d2 = np.diff(d1) / step
    return float(step * np.dot(d2, d2))

"""Emission families: state-conditional log scores and weighted reestimation.

Each family scores an observation against a state's parameters with a
log-emission that is, up to its sign, a squared distance in the norm natural
to that family (plus a reversion bonus term for the mean-reverting family).
All constants are kept, so log values are comparable across states and
families.  Reestimation solves the weighted least squares problem exactly,
in closed form, for the quadrature discretization used by the log-emission;
the reestimated parameter is therefore the true minimizer of the weighted
negative log score, not just an asymptotic approximation of it.

Observation conventions: the Euclidean family scores plain vectors, every
other family scores anchored :class:`~pathhmm.paths.Path` objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DimensionMismatch, NumericalError
from .paths import Grid, Path, sobolev_sq_distance

# Lower bound for the reversion rate b1; keeps the mean b0/b1 defined.
B1_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class EuclideanEmission:
    """Gaussian state in R^d with a precision matrix shared across states.

    The precision array is stored by reference: build one matrix per model
    and pass the same object to every state so the shared-covariance
    structure is preserved under reestimation.
    """

    mean: np.ndarray
    precision: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        precision = np.asarray(self.precision, dtype=float)
        d = mean.size
        if precision.shape != (d, d):
            raise DimensionMismatch(
                f"precision shape {precision.shape} does not match mean dimension {d}"
            )
        if not np.allclose(precision, precision.T, atol=1e-12, rtol=0.0):
            raise ValueError("precision matrix must be symmetric to 1e-12")
        object.__setattr__(self, "mean", mean)

    def log_emission(self, obs) -> float:
        obs = np.atleast_1d(np.asarray(obs, dtype=float))
        if obs.shape != self.mean.shape:
            raise DimensionMismatch(
                f"observation shape {obs.shape} does not match mean shape {self.mean.shape}"
            )
        r = obs - self.mean
        return float(-0.5 * r @ self.precision @ r)


@dataclass(frozen=True)
class BmDriftEmission:
    """Constant-drift state under Wiener measure: -1/2 int (O' - drift)^2."""

    drift: float

    def __post_init__(self):
        if not math.isfinite(self.drift):
            raise ValueError("drift must be finite")

    def log_emission(self, obs: Path) -> float:
        _require_path(obs)
        c = self.drift
        return -0.5 * (obs.sq_deriv_integral - 2.0 * c * obs.increment + c * c)


@dataclass(frozen=True)
class OuEmission:
    """Mean-reverting state, parametrized by b0 = rate * mean and b1 = rate.

    log score = -1/2 int (O' - (b0 - b1 O))^2 dtau + b1 / 2, with the path
    evaluated at interval midpoints so the closed-form reestimation below is
    the exact discrete optimum.
    """

    b0: float
    b1: float

    def __post_init__(self):
        if not (math.isfinite(self.b0) and math.isfinite(self.b1)):
            raise ValueError("b0 and b1 must be finite")
        if self.b1 <= 0:
            raise ValueError(f"b1 must be positive, got {self.b1}")

    @property
    def mean(self) -> float:
        return self.b0 / self.b1

    @property
    def rate(self) -> float:
        return self.b1

    def log_emission(self, obs: Path) -> float:
        _require_path(obs)
        b0, b1 = self.b0, self.b1
        quad = (
            obs.sq_deriv_integral
            - 2.0 * b0 * obs.increment
            + 2.0 * b1 * obs.deriv_mean_integral
            + b0 * b0
            - 2.0 * b0 * b1 * obs.mean_integral
            + b1 * b1 * obs.sq_mean_integral
        )
        return -0.5 * quad + 0.5 * b1


@dataclass(frozen=True)
class FbmDriftEmission:
    """Constant-drift state under a fractional noise of known Hurst index.

    The drift enters the score through the gain g(tau) = prefactor *
    tau^exponent from :func:`fbm_gain`; hurst = 1/2 reduces to the plain
    Brownian drift family.
    """

    drift: float
    hurst: float

    def __post_init__(self):
        if not math.isfinite(self.drift):
            raise ValueError("drift must be finite")
        fbm_gain(self.hurst)  # validates the range

    @property
    def exponent(self) -> float:
        return fbm_gain(self.hurst)[0]

    @property
    def prefactor(self) -> float:
        return fbm_gain(self.hurst)[1]

    def log_emission(self, obs: Path) -> float:
        _require_path(obs)
        exponent, prefactor = fbm_gain(self.hurst)
        weights = _gain_interval_integrals(obs.grid, exponent, prefactor)
        gain_moment = float(np.dot(weights, obs.deriv))
        sq_gain = prefactor * prefactor / (2.0 * exponent + 1.0)
        c = self.drift
        return -0.5 * (obs.sq_deriv_integral - 2.0 * c * gain_moment + c * c * sq_gain)


@dataclass(frozen=True, eq=False)
class NonparametricEmission:
    """Free-form state mean compared in a Sobolev norm of order 1 or 2."""

    mean_path: Path
    order: int = 1

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")

    def log_emission(self, obs: Path) -> float:
        _require_path(obs)
        return -0.5 * sobolev_sq_distance(obs, self.mean_path, self.order)


EmissionModel = Union[
    EuclideanEmission,
    BmDriftEmission,
    OuEmission,
    FbmDriftEmission,
    NonparametricEmission,
]


def _require_path(obs):
    if not isinstance(obs, Path):
        raise DimensionMismatch(f"expected a Path observation, got {type(obs).__name__}")


def log_emission(emission: EmissionModel, obs) -> float:
    """Log score of one observation under one state's emission."""
    return emission.log_emission(obs)


def _check_weights(weights, n_obs: int) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n_obs,):
        raise DimensionMismatch(f"expected {n_obs} weights, got shape {weights.shape}")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if weights.sum() <= 0:
        raise ValueError("weights must not all be zero")
    return weights


def _shared_grid(obs) -> Grid:
    grid = obs[0].grid
    for p in obs:
        if p.grid != grid:
            raise DimensionMismatch("observations live on different grids")
    return grid


def reestimate_euclidean(weights, obs) -> np.ndarray:
    """Weighted average of observation vectors."""
    vectors = np.atleast_2d(np.asarray([np.atleast_1d(o) for o in obs], dtype=float))
    weights = _check_weights(weights, vectors.shape[0])
    return weights @ vectors / weights.sum()


def reestimate_bm_drift(weights, obs) -> float:
    """Weighted average of path increments O(1) - O(0)."""
    weights = _check_weights(weights, len(obs))
    increments = np.array([p.increment for p in obs])
    return float(weights @ increments / weights.sum())


def _ou_normal_stats(weights, obs):
    weights = _check_weights(weights, len(obs))
    _shared_grid(obs)
    total = weights.sum()
    incr = np.array([p.increment for p in obs])
    mean_int = np.array([p.mean_integral for p in obs])
    cross = np.array([p.deriv_mean_integral for p in obs])
    sq_mean = np.array([p.sq_mean_integral for p in obs])
    sq_deriv = np.array([p.sq_deriv_integral for p in obs])
    return (
        float(weights @ incr / total),
        float(weights @ mean_int / total),
        float(weights @ cross / total),
        float(weights @ sq_mean / total),
        float(weights @ sq_deriv / total),
    )


def ou_objective_and_gradient(b0: float, b1: float, weights, obs):
    """Weighted mean-reversion objective u(b0, b1) and its two partials.

    u averages 1/2 int (O' - (b0 - b1 O))^2 dtau - b1/2 over observations
    under the given weights.  Returns (u, du/db0, du/db1).
    """
    abar, bbar, cbar, dbar, ebar = _ou_normal_stats(weights, obs)
    u = 0.5 * (
        ebar
        - 2.0 * b0 * abar
        + 2.0 * b1 * cbar
        + b0 * b0
        - 2.0 * b0 * b1 * bbar
        + b1 * b1 * dbar
    ) - 0.5 * b1
    du_db0 = -(abar - b0 + b1 * bbar)
    du_db1 = cbar - b0 * bbar + b1 * dbar - 0.5
    return u, du_db0, du_db1


def reestimate_ou(weights, obs) -> tuple[float, float]:
    """Minimize the mean-reversion objective exactly via its normal equations.

    The objective is jointly quadratic in (b0, b1), so a 2x2 solve gives the
    optimum; if the unconstrained solution has b1 below B1_FLOOR, b1 is
    clamped there and b0 re-solved, which keeps the projected gradient zero.
    """
    abar, bbar, cbar, dbar, _ = _ou_normal_stats(weights, obs)
    det = dbar - bbar * bbar
    if det <= 1e-12 * max(1.0, dbar):
        raise NumericalError("degenerate state: observations are constant paths")
    b1 = (0.5 - cbar + abar * bbar) / det
    if b1 < B1_FLOOR:
        b1 = B1_FLOOR
    b0 = abar + b1 * bbar
    return float(b0), float(b1)


def fbm_gain(hurst: float) -> tuple[float, float]:
    """Drift gain for fractional noise: g(tau) = prefactor * tau^exponent.

    Rough indices in (1/4, 1/2) give a positive exponent, smooth indices in
    (1/2, 1) a negative one; hurst = 1/2 returns (0, 1), the Brownian limit.
    """
    if hurst == 0.5:
        return 0.0, 1.0
    if 0.25 < hurst < 0.5:
        u = 0.5 - hurst
        return u, math.gamma(u + 1.0) / math.gamma(2.0 * u + 1.0)
    if 0.5 < hurst < 1.0:
        w = hurst - 0.5
        return -w, (1.0 - 2.0 * w) * math.gamma(1.0 - w) / math.gamma(2.0 - 2.0 * w)
    raise ValueError(f"hurst must lie in (1/4, 1), 1/4 excluded; got {hurst}")


@lru_cache(maxsize=32)
def _gain_interval_integrals(grid: Grid, exponent: float, prefactor: float) -> np.ndarray:
    """Exact integrals of the gain over each grid interval.

    Closed-form local moments keep the tau = 0 singularity of the negative-
    exponent regime integrable: the first interval contributes
    prefactor * step^(exponent+1) / (exponent + 1) analytically.
    """
    powers = grid.taus ** (exponent + 1.0)
    weights = np.diff(powers) * (prefactor / (exponent + 1.0))
    weights.flags.writeable = False
    return weights


def reestimate_fbm_drift(weights, obs, hurst: float) -> float:
    """Weighted drift estimate under a fractional gain of known Hurst index.

    This is the exact minimizer of the weighted negative log score: the
    gain moment int g * O' dtau uses exact per-interval integrals of g
    against the piecewise-constant derivative (for piecewise-linear paths
    this coincides with integrating O against the gain's derivative by
    parts, since O(0) = 0), and the denominator int g^2 dtau is analytic.
    At hurst = 1/2 the formula collapses to the plain increment average.
    """
    weights = _check_weights(weights, len(obs))
    grid = _shared_grid(obs)
    exponent, prefactor = fbm_gain(hurst)
    gain_weights = _gain_interval_integrals(grid, exponent, prefactor)
    moments = np.array([float(np.dot(gain_weights, p.deriv)) for p in obs])
    sq_gain = prefactor * prefactor / (2.0 * exponent + 1.0)
    return float(weights @ moments / (weights.sum() * sq_gain))


def reestimate_nonparametric(weights, obs) -> Path:
    """Pointwise weighted average of anchored paths."""
    weights = _check_weights(weights, len(obs))
    grid = _shared_grid(obs)
    stacked = np.stack([p.values for p in obs])
    return Path(grid, weights @ stacked / weights.sum())

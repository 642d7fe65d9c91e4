"""Seeded generators for Markov state sequences and the three process families.

Every generator is a deterministic function of its parameters, the grid, and
a 64-bit seed.  Randomness comes from a counter-based Philox stream per call
and normal variates are produced by inverse-CDF, so identical seeds give
bit-identical output on any platform and paths can be generated in parallel
without changing the result.  The ``noise_scale`` hook (default 1) exists so
deterministic-path tests can switch the noise off.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .errors import NumericalError
from .paths import Grid, Path


@dataclass(frozen=True, eq=False)
class MarkovSpec:
    """Initial distribution and row-stochastic transition matrix."""

    eta: np.ndarray
    trans: np.ndarray

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        trans = np.asarray(self.trans, dtype=float)
        p = eta.size
        if trans.shape != (p, p):
            raise ValueError(f"transition matrix shape {trans.shape} does not match {p} states")
        if np.any(eta < 0) or np.any(trans < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(eta.sum() - 1.0) > 1e-12 or np.any(np.abs(trans.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("eta and all transition rows must sum to 1 within 1e-12")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "trans", trans)

    @property
    def n_states(self) -> int:
        return self.eta.size


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _standard_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    # Inverse-CDF keeps the draw reproducible across platforms and numpy versions.
    u = rng.random(size)
    return ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))


def child_seeds(seed: int, count: int) -> np.ndarray:
    """Independent 64-bit seeds derived from one root seed, one per stream."""
    return np.random.SeedSequence(int(seed)).generate_state(count, dtype=np.uint64)


def sample_states(spec: MarkovSpec, T: int, seed: int) -> np.ndarray:
    """Markov chain sample of length T; states are numbered from 1."""
    if T < 1:
        raise ValueError("T must be at least 1")
    rng = _rng(seed)
    u = rng.random(T)
    eta_cdf = np.cumsum(spec.eta)
    trans_cdf = np.cumsum(spec.trans, axis=1)
    states = np.empty(T, dtype=int)
    states[0] = int(np.searchsorted(eta_cdf, u[0], side="right"))
    for t in range(1, T):
        states[t] = int(np.searchsorted(trans_cdf[states[t - 1]], u[t], side="right"))
    return np.minimum(states, spec.n_states - 1) + 1


def sample_bm_drift(drift: float, grid: Grid, seed: int, noise_scale: float = 1.0) -> Path:
    """Brownian path with constant drift: increments drift*step + sqrt(step)*N(0,1)."""
    rng = _rng(seed)
    z = _standard_normals(rng, grid.n_points - 1)
    increments = drift * grid.step + noise_scale * np.sqrt(grid.step) * z
    values = np.concatenate(([0.0], np.cumsum(increments)))
    return Path(grid, values)


def sample_ou(rate: float, mean: float, grid: Grid, seed: int, noise_scale: float = 1.0) -> Path:
    """Mean-reverting path started at 0, using the exact transition density.

    Y_{k+1} = mean + (Y_k - mean) * exp(-rate*step) + N(0, (1-exp(-2*rate*step))/(2*rate)),
    so there is no time-discretization bias at any step size.
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    rng = _rng(seed)
    step = grid.step
    pull = np.exp(-rate * step)
    sd = np.sqrt((1.0 - np.exp(-2.0 * rate * step)) / (2.0 * rate))
    z = _standard_normals(rng, grid.n_points - 1)
    values = np.empty(grid.n_points)
    values[0] = 0.0
    y = 0.0
    for k in range(grid.n_points - 1):
        y = mean + (y - mean) * pull + noise_scale * sd * z[k]
        values[k + 1] = y
    return Path(grid, values)


def fbm_covariance(hurst: float, grid: Grid) -> np.ndarray:
    """Fractional covariance (t^2v + s^2v - |t-s|^2v) / 2 over interior nodes.

    The tau = 0 node is excluded: its row and column are identically zero.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    taus = grid.taus[1:]
    two_v = 2.0 * hurst
    gaps = np.abs(taus[:, None] - taus[None, :])
    return 0.5 * (taus[:, None] ** two_v + taus[None, :] ** two_v - gaps**two_v)


@lru_cache(maxsize=16)
def _fbm_cholesky(hurst: float, grid: Grid) -> np.ndarray:
    cov = fbm_covariance(hurst, grid)
    jitter = 0.0
    while True:
        try:
            factor = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
            factor.flags.writeable = False
            return factor
        except np.linalg.LinAlgError:
            if jitter >= 1e-8:
                raise NumericalError(
                    f"fractional covariance is not factorizable at hurst={hurst} "
                    f"even with diagonal jitter 1e-8"
                ) from None
            jitter = 1e-12 if jitter == 0.0 else jitter * 10.0


def sample_fbm(hurst: float, drift: float, grid: Grid, seed: int, noise_scale: float = 1.0) -> Path:
    """Fractional path with constant drift via a dense Cholesky factor.

    The factor is cached per (hurst, grid); a 1e-12 diagonal jitter,
    escalated tenfold up to 1e-8, covers marginal indefiniteness before
    the generator gives up.
    """
    factor = _fbm_cholesky(hurst, grid)
    rng = _rng(seed)
    z = _standard_normals(rng, grid.n_points - 1)
    values = drift * grid.taus.copy()
    values[1:] += noise_scale * (factor @ z)
    return Path(grid, values)


def state_path_sampler(
    family: str,
    *,
    drifts=None,
    means=None,
    rates=None,
    hurst: float | None = None,
    noise_scale: float = 1.0,
):
    """Per-state path factory: returns sample(state, grid, seed) for a family.

    States are 1-based.  ``bm`` needs drifts; ``ou`` needs means and rates;
    ``fbm`` needs drifts and one hurst index shared by all states.
    """
    if family == "bm":
        if drifts is None:
            raise ValueError("bm sampler needs drifts")
        drifts = [float(c) for c in drifts]
        return lambda state, grid, seed: sample_bm_drift(
            drifts[state - 1], grid, seed, noise_scale
        )
    if family == "ou":
        if means is None or rates is None:
            raise ValueError("ou sampler needs means and rates")
        means = [float(m) for m in means]
        rates = [float(c) for c in rates]
        return lambda state, grid, seed: sample_ou(
            rates[state - 1], means[state - 1], grid, seed, noise_scale
        )
    if family == "fbm":
        if drifts is None or hurst is None:
            raise ValueError("fbm sampler needs drifts and hurst")
        drifts = [float(c) for c in drifts]
        return lambda state, grid, seed: sample_fbm(
            hurst, drifts[state - 1], grid, seed, noise_scale
        )
    raise ValueError(f"unknown simulation family {family!r}")


def simulate_sequence(
    markov: MarkovSpec,
    sampler,
    T: int,
    grid: Grid,
    seed: int,
) -> tuple[list[Path], np.ndarray]:
    """Hidden states plus one path per time step, on independent seed streams.

    Stream 0 drives the state chain and stream t the t-th path, so the same
    root seed reproduces the dataset no matter how generation is scheduled.
    """
    seeds = child_seeds(seed, T + 1)
    states = sample_states(markov, T, int(seeds[0]))
    paths = [sampler(int(states[t]), grid, int(seeds[t + 1])) for t in range(T)]
    return paths, states

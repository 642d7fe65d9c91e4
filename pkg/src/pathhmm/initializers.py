"""Starting points for the reestimation loop.

Nonparametric fits start from k-means cluster means or randomly chosen
observations; parametric fits start from quantiles of per-observation
parameter estimates, which spreads the initial states across the range the
data actually covers.  All outputs are deterministic given the seed and lie
in the pointwise convex hull of the observations.
"""

from __future__ import annotations

import numpy as np

from .emissions import (
    BmDriftEmission,
    FbmDriftEmission,
    OuEmission,
    reestimate_fbm_drift,
    reestimate_nonparametric,
    reestimate_ou,
)
from .paths import Path, sobolev_sq_distance
from .simulate import _rng


def init_kmeans(obs, p: int, order: int = 1, seed: int = 0, n_iter: int = 50) -> list[Path]:
    """Lloyd k-means on paths under the squared Sobolev distance.

    Seeding is k-means++ style (next center drawn proportionally to the
    squared distance from the chosen ones); an emptied cluster is re-seeded
    from the point farthest from every current center.
    """
    T = len(obs)
    if not 1 <= p <= T:
        raise ValueError(f"need 1 <= p <= {T}, got p={p}")
    rng = _rng(seed)
    centers = [obs[int(rng.integers(T))]]
    while len(centers) < p:
        dists = np.array([min(sobolev_sq_distance(o, c, order) for c in centers) for o in obs])
        total = dists.sum()
        if total <= 0:
            # All remaining points coincide with a center; any unused one works.
            centers.append(obs[int(rng.integers(T))])
            continue
        pick = int(np.searchsorted(np.cumsum(dists / total), rng.random(), side="right"))
        centers.append(obs[min(pick, T - 1)])

    assign = np.full(T, -1)
    for _ in range(n_iter):
        dists = np.array(
            [[sobolev_sq_distance(o, c, order) for c in centers] for o in obs]
        )
        new_assign = np.argmin(dists, axis=1)
        # re-seed emptied clusters from the points farthest from any center,
        # one distinct point per cluster
        farthest_first = np.argsort(-dists.min(axis=1))
        grabbed = set()
        for j in range(p):
            if not np.any(new_assign == j):
                for idx in farthest_first:
                    if int(idx) not in grabbed:
                        new_assign[int(idx)] = j
                        grabbed.add(int(idx))
                        break
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        centers = [
            reestimate_nonparametric((assign == j).astype(float), obs)
            if np.any(assign == j)
            else centers[j]
            for j in range(p)
        ]
    return centers


def init_random_obs(obs, p: int, seed: int = 0) -> list[Path]:
    """p distinct observations drawn without replacement."""
    T = len(obs)
    if not 1 <= p <= T:
        raise ValueError(f"need 1 <= p <= {T}, got p={p}")
    rng = _rng(seed)
    picks = rng.choice(T, size=p, replace=False)
    return [obs[int(i)] for i in picks]


def _spread(values: np.ndarray, p: int) -> np.ndarray:
    quantiles = np.arange(1, p + 1) / (p + 1)
    return np.quantile(values, quantiles)


def init_spread_params(obs, p: int, family: str, hurst: float | None = None) -> list:
    """Per-state parametric emissions at quantiles of per-path estimates.

    Each observation is fitted on its own, then the p states start at the
    1/(p+1), ..., p/(p+1) quantiles of the resulting parameter values.
    Only the parametric families are supported.
    """
    T = len(obs)
    if not 1 <= p <= T:
        raise ValueError(f"need 1 <= p <= {T}, got p={p}")
    if family == "bm":
        drifts = _spread(np.array([o.increment for o in obs]), p)
        return [BmDriftEmission(float(c)) for c in drifts]
    if family == "ou":
        singles = [reestimate_ou(np.eye(T)[t], obs) for t in range(T)]
        b0s = _spread(np.array([s[0] for s in singles]), p)
        b1s = _spread(np.array([s[1] for s in singles]), p)
        return [OuEmission(float(b0), float(b1)) for b0, b1 in zip(b0s, b1s)]
    if family == "fbm":
        if hurst is None:
            raise ValueError("fbm initialization needs a hurst index")
        singles = [reestimate_fbm_drift(np.eye(T)[t], obs, hurst) for t in range(T)]
        drifts = _spread(np.array(singles), p)
        return [FbmDriftEmission(float(c), hurst) for c in drifts]
    raise ValueError(f"spread initialization needs a parametric family, got {family!r}")


def init_markov_uniform(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform initial probabilities; transitions mildly favoring persistence.

    Rows have 0.5 on the diagonal and share the rest uniformly, which speeds
    convergence on persistent regimes without biasing the fixed points.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    eta = np.full(p, 1.0 / p)
    if p == 1:
        return eta, np.ones((1, 1))
    trans = np.full((p, p), 0.5 / (p - 1))
    np.fill_diagonal(trans, 0.5)
    return eta, trans

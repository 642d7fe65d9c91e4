"""Model construction and multi-start fitting on top of the engine.

Bridges the initializer outputs to concrete emission families and runs
independently seeded restarts, keeping the model with the highest final
log-likelihood.  Restarts execute in parallel, but model selection is a
deterministic reduction (highest log-likelihood, lowest restart index on
ties), so the result does not depend on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .emissions import (
    BmDriftEmission,
    EuclideanEmission,
    FbmDriftEmission,
    NonparametricEmission,
    OuEmission,
    reestimate_fbm_drift,
    reestimate_ou,
)
from .engine import FitReport, ThmmModel, baum_welch
from .errors import NumericalError
from .initializers import (
    init_kmeans,
    init_markov_uniform,
    init_random_obs,
    init_spread_params,
)
from .paths import Path
from .simulate import child_seeds

FAMILIES = ("euclidean", "bm", "ou", "fbm", "nonparametric")
INIT_STRATEGIES = ("kmeans", "random", "spread")


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """Which emission family to fit and its fixed (non-estimated) inputs."""

    family: str
    hurst: float | None = None
    order: int = 1
    precision: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "fbm" and self.hurst is None:
            raise ValueError("fbm family needs a hurst index")


def _emissions_from_means(means: list[Path], spec: FamilySpec, obs) -> list:
    """Turn initializer mean paths into emissions of the requested family."""
    if spec.family == "nonparametric":
        return [NonparametricEmission(m, spec.order) for m in means]
    if spec.family == "bm":
        return [BmDriftEmission(m.increment) for m in means]
    if spec.family == "fbm":
        one = np.ones(1)
        return [
            FbmDriftEmission(reestimate_fbm_drift(one, [m], spec.hurst), spec.hurst)
            for m in means
        ]
    if spec.family == "ou":
        one = np.ones(1)
        return [OuEmission(*reestimate_ou(one, [m])) for m in means]
    if spec.family == "euclidean":
        d = means[0].grid.n_points
        precision = spec.precision if spec.precision is not None else np.eye(d)
        return [EuclideanEmission(m.values.copy(), precision) for m in means]
    raise ValueError(f"unknown family {spec.family!r}")


def initial_model(obs, p: int, spec: FamilySpec, strategy: str, seed: int) -> ThmmModel:
    """Build a starting model from one of the initialization strategies."""
    if strategy not in INIT_STRATEGIES:
        raise ValueError(f"unknown init strategy {strategy!r}; expected one of {INIT_STRATEGIES}")
    eta, trans = init_markov_uniform(p)
    if strategy == "spread":
        emissions = init_spread_params(obs, p, spec.family, hurst=spec.hurst)
    else:
        means = (
            init_kmeans(obs, p, order=spec.order, seed=seed)
            if strategy == "kmeans"
            else init_random_obs(obs, p, seed)
        )
        emissions = _emissions_from_means(means, spec, obs)
    return ThmmModel(eta, trans, emissions)


def observations_for_family(obs, spec: FamilySpec):
    """Paths stay paths; the Euclidean family scores the raw value vectors."""
    if spec.family == "euclidean":
        return [p.values for p in obs]
    return list(obs)


@dataclass
class RestartResult:
    model: ThmmModel
    report: FitReport
    restart: int
    seed: int


def fit_restarts(
    obs,
    p: int,
    spec: FamilySpec,
    n_restarts: int = 1,
    seed: int = 0,
    strategy: str = "kmeans",
    tol: float = 1e-6,
    max_iter: int = 500,
    parallel: bool = True,
) -> RestartResult:
    """Fit n_restarts independently initialized models; keep the best one.

    The spread strategy is deterministic, so extra restarts only matter for
    the seeded strategies; each restart gets its own derived seed either way.
    """
    if n_restarts < 1:
        raise ValueError("need at least one restart")
    seeds = [int(s) for s in child_seeds(seed, n_restarts)]

    model_obs = observations_for_family(obs, spec)

    def run(r: int) -> RestartResult | None:
        try:
            model0 = initial_model(obs, p, spec, strategy, seeds[r])
            model, report = baum_welch(model0, model_obs, tol=tol, max_iter=max_iter)
            return RestartResult(model, report, r, seeds[r])
        except NumericalError:
            return None

    if parallel and n_restarts > 1:
        with ThreadPoolExecutor(max_workers=min(n_restarts, 8)) as pool:
            results = list(pool.map(run, range(n_restarts)))
    else:
        results = [run(r) for r in range(n_restarts)]

    survivors = [r for r in results if r is not None]
    if not survivors:
        raise NumericalError("every restart produced a zero-probability model")
    return max(survivors, key=lambda r: (r.report.loglik_trace[-1], -r.restart))

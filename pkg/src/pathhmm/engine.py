"""Log-space forward-backward, reestimation loop, and most-likely-state decoding.

The engine is agnostic to the emission family: it only needs the T x p
matrix of log emission scores.  All recursions run in the log domain with a
minus-infinity-safe log-sum-exp, so zero initial probabilities or forbidden
transitions are permitted and simply propagate as -inf entries.  Fixed
sequential reduction orders keep results identical from run to run.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .emissions import (
    BmDriftEmission,
    EmissionModel,
    EuclideanEmission,
    FbmDriftEmission,
    NonparametricEmission,
    OuEmission,
    reestimate_bm_drift,
    reestimate_euclidean,
    reestimate_fbm_drift,
    reestimate_nonparametric,
    reestimate_ou,
)
from .errors import DegenerateStateWarning, NumericalError

# Posterior mass below which a state is treated as unoccupied.
DEGENERATE_MASS = 1e-12


def _check_stochastic(vector: np.ndarray, what: str):
    if np.any(vector < 0):
        raise ValueError(f"{what} has negative entries")
    if abs(vector.sum() - 1.0) > 1e-12:
        raise ValueError(f"{what} must sum to 1 within 1e-12, got {vector.sum()!r}")


@dataclass
class ThmmModel:
    """Initial probabilities, transition matrix, and one emission per state."""

    eta: np.ndarray
    trans: np.ndarray
    emissions: list

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        trans = np.asarray(self.trans, dtype=float)
        p = eta.size
        if p < 1:
            raise ValueError("model needs at least one state")
        if trans.shape != (p, p):
            raise ValueError(f"transition matrix shape {trans.shape} does not match {p} states")
        _check_stochastic(eta, "eta")
        for i in range(p):
            _check_stochastic(trans[i], f"transition row {i}")
        if len(self.emissions) != p:
            raise ValueError(f"expected {p} emissions, got {len(self.emissions)}")
        first = type(self.emissions[0])
        if any(type(e) is not first for e in self.emissions):
            raise ValueError("all states must share one emission family")
        self.eta = eta
        self.trans = trans

    @property
    def n_states(self) -> int:
        return self.eta.size


@dataclass
class Trellis:
    """Forward/backward log probabilities and the sequence log-likelihood."""

    log_alpha: np.ndarray
    log_beta: np.ndarray
    log_likelihood: float


@dataclass
class Posteriors:
    """State occupancies gamma[t, i] and transition posteriors xi[t, i, j]."""

    gamma: np.ndarray
    xi: np.ndarray


@dataclass
class FitReport:
    iterations: int
    loglik_trace: np.ndarray
    converged: bool


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    """Log-sum-exp along an axis; all -inf slices reduce to -inf, not nan."""
    peak = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - safe), axis=axis)) + np.squeeze(safe, axis=axis)
    return out


def log_emission_matrix(model: ThmmModel, obs) -> np.ndarray:
    """T x p matrix of log emission scores for an observation sequence."""
    T = len(obs)
    if T < 1:
        raise ValueError("need at least one observation")
    logb = np.empty((T, model.n_states))
    for t, o in enumerate(obs):
        for j, emission in enumerate(model.emissions):
            logb[t, j] = emission.log_emission(o)
    return logb


def _log_params(model: ThmmModel):
    with np.errstate(divide="ignore"):
        return np.log(model.eta), np.log(model.trans)


def forward_backward_logb(log_eta: np.ndarray, log_trans: np.ndarray, logb: np.ndarray) -> Trellis:
    """Forward-backward recursions from a precomputed log-emission matrix."""
    T, p = logb.shape
    log_alpha = np.empty((T, p))
    log_beta = np.empty((T, p))
    log_alpha[0] = log_eta + logb[0]
    for t in range(1, T):
        log_alpha[t] = _logsumexp(log_alpha[t - 1][:, None] + log_trans, axis=0) + logb[t]
    log_beta[T - 1] = 0.0
    for t in range(T - 2, -1, -1):
        log_beta[t] = _logsumexp(log_trans + (logb[t + 1] + log_beta[t + 1])[None, :], axis=1)
    log_likelihood = float(_logsumexp(log_alpha[T - 1][None, :], axis=1)[0])
    return Trellis(log_alpha, log_beta, log_likelihood)


def forward_backward(model: ThmmModel, obs) -> Trellis:
    """Log-domain forward and backward passes plus the log-likelihood."""
    log_eta, log_trans = _log_params(model)
    return forward_backward_logb(log_eta, log_trans, log_emission_matrix(model, obs))


def posteriors_logb(trellis: Trellis, log_trans: np.ndarray, logb: np.ndarray) -> Posteriors:
    if trellis.log_likelihood == -np.inf:
        raise NumericalError("model assigns zero probability to the observations")
    T, p = logb.shape
    log_gamma = trellis.log_alpha + trellis.log_beta - trellis.log_likelihood
    gamma = np.exp(log_gamma)
    gamma /= gamma.sum(axis=1, keepdims=True)
    xi = np.empty((T - 1, p, p))
    for t in range(T - 1):
        log_slice = (
            trellis.log_alpha[t][:, None]
            + log_trans
            + (logb[t + 1] + trellis.log_beta[t + 1])[None, :]
        )
        peak = log_slice.max()
        slice_ = np.exp(log_slice - (peak if np.isfinite(peak) else 0.0))
        xi[t] = slice_ / slice_.sum()
    return Posteriors(gamma, xi)


def posteriors(trellis: Trellis, model: ThmmModel, obs) -> Posteriors:
    """Per-time state posteriors and pairwise transition posteriors."""
    _, log_trans = _log_params(model)
    return posteriors_logb(trellis, log_trans, log_emission_matrix(model, obs))


def _reestimate_emission(emission: EmissionModel, weights: np.ndarray, obs) -> EmissionModel:
    if isinstance(emission, EuclideanEmission):
        # The precision object is shared across states and passes through.
        return EuclideanEmission(reestimate_euclidean(weights, obs), emission.precision)
    if isinstance(emission, BmDriftEmission):
        return BmDriftEmission(reestimate_bm_drift(weights, obs))
    if isinstance(emission, OuEmission):
        b0, b1 = reestimate_ou(weights, obs)
        return OuEmission(b0, b1)
    if isinstance(emission, FbmDriftEmission):
        return FbmDriftEmission(reestimate_fbm_drift(weights, obs, emission.hurst), emission.hurst)
    if isinstance(emission, NonparametricEmission):
        return NonparametricEmission(reestimate_nonparametric(weights, obs), emission.order)
    raise TypeError(f"unknown emission family {type(emission).__name__}")


def reestimate(model: ThmmModel, post: Posteriors, obs) -> ThmmModel:
    """One reestimation sweep: new eta, transition rows, and state parameters.

    Emission weights are the occupancies gamma[:, j]; they differ from the
    raw alpha*beta products only by the constant likelihood factor, which
    cancels in every weighted average.  A state with vanishing posterior
    mass keeps its previous parameters and triggers a warning.
    """
    gamma, xi = post.gamma, post.xi
    p = model.n_states
    new_eta = gamma[0] / gamma[0].sum()
    new_trans = np.empty_like(model.trans)
    occupancy = gamma[:-1].sum(axis=0) if gamma.shape[0] > 1 else np.zeros(p)
    for i in range(p):
        if occupancy[i] < DEGENERATE_MASS:
            new_trans[i] = model.trans[i]
        else:
            row = xi[:, i, :].sum(axis=0)
            new_trans[i] = row / row.sum()
    new_emissions = []
    for j, emission in enumerate(model.emissions):
        weights = gamma[:, j]
        if weights.sum() < DEGENERATE_MASS:
            warnings.warn(
                f"state {j + 1} received no posterior mass; parameters kept",
                DegenerateStateWarning,
                stacklevel=2,
            )
            new_emissions.append(emission)
        else:
            new_emissions.append(_reestimate_emission(emission, weights, obs))
    return ThmmModel(new_eta, new_trans, new_emissions)


def baum_welch(
    model0: ThmmModel,
    obs,
    tol: float = 1e-6,
    max_iter: int = 500,
) -> tuple[ThmmModel, FitReport]:
    """Iterate reestimation until the relative log-likelihood change is small.

    Stops when |l_new - l_old| / |l_new| < tol (the absolute value in the
    denominator guards against sign flips for negative log-likelihoods) or
    after max_iter sweeps.  The returned trace holds the log-likelihood of
    every visited model, the initial one included.
    """
    model = model0
    trellis = forward_backward(model, obs)
    if trellis.log_likelihood == -np.inf:
        raise NumericalError("initial model assigns zero probability to the observations")
    trace = [trellis.log_likelihood]
    converged = False
    for _ in range(max_iter):
        post = posteriors(trellis, model, obs)
        model = reestimate(model, post, obs)
        trellis = forward_backward(model, obs)
        trace.append(trellis.log_likelihood)
        denom = abs(trace[-1])
        if abs(trace[-1] - trace[-2]) <= tol * (denom if denom > 0 else 1.0):
            converged = True
            break
    report = FitReport(iterations=len(trace) - 1, loglik_trace=np.array(trace), converged=converged)
    return model, report


def viterbi_logb(log_eta: np.ndarray, log_trans: np.ndarray, logb: np.ndarray) -> np.ndarray:
    """Most probable state sequence (1-based labels) from log emissions."""
    T, p = logb.shape
    delta = log_eta + logb[0]
    back = np.zeros((T, p), dtype=int)
    if not np.any(delta > -np.inf):
        raise NumericalError("no feasible state at t=1")
    for t in range(1, T):
        scores = delta[:, None] + log_trans
        back[t] = np.argmax(scores, axis=0)  # first max: ties go to the lowest state
        delta = scores[back[t], np.arange(p)] + logb[t]
        if not np.any(delta > -np.inf):
            raise NumericalError(f"no feasible state at t={t + 1}")
    states = np.empty(T, dtype=int)
    states[T - 1] = int(np.argmax(delta))
    for t in range(T - 2, -1, -1):
        states[t] = back[t + 1][states[t + 1]]
    return states + 1


def viterbi(model: ThmmModel, obs) -> np.ndarray:
    """Decode the most probable state sequence; states are numbered from 1."""
    log_eta, log_trans = _log_params(model)
    return viterbi_logb(log_eta, log_trans, log_emission_matrix(model, obs))

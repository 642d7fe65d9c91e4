"""Independent reference implementations used to check the library.

Everything here is deliberately brute force: likelihoods sum over every one
of the p^T state sequences, the pair-counting index iterates over all pairs,
and the smoother is a plain double loop.  None of it shares code with the
package under test.
"""

import itertools
import math

import numpy as np


def enumerate_sequences(p, T):
    return np.array(list(itertools.product(range(p), repeat=T)), dtype=int)


def sequence_log_weights(eta, trans, logb):
    """Log weight log(eta * prod a * prod b) of every state sequence."""
    T, p = logb.shape
    seqs = enumerate_sequences(p, T)
    with np.errstate(divide="ignore"):
        log_eta = np.log(eta)
        log_trans = np.log(trans)
    logw = log_eta[seqs[:, 0]] + logb[np.arange(T)[None, :], seqs].sum(axis=1)
    for t in range(1, T):
        logw = logw + log_trans[seqs[:, t - 1], seqs[:, t]]
    return seqs, logw


def brute_force_likelihood(eta, trans, logb):
    _, logw = sequence_log_weights(eta, trans, logb)
    return math.log(np.exp(logw).sum())


def brute_force_gamma(eta, trans, logb):
    T, p = logb.shape
    seqs, logw = sequence_log_weights(eta, trans, logb)
    w = np.exp(logw)
    total = w.sum()
    gamma = np.empty((T, p))
    for t in range(T):
        for i in range(p):
            gamma[t, i] = w[seqs[:, t] == i].sum() / total
    return gamma


def brute_force_viterbi(eta, trans, logb):
    seqs, logw = sequence_log_weights(eta, trans, logb)
    return seqs[int(np.argmax(logw))] + 1


def brute_force_q(eta, trans, logb_old, logb_new, eta_new, trans_new):
    """Reestimation objective Q(old, new) = sum_s L_old(O, s) log L_new(O, s)."""
    seqs, logw_old = sequence_log_weights(eta, trans, logb_old)
    _, logw_new = sequence_log_weights(eta_new, trans_new, logb_new)
    return float(np.exp(logw_old) @ logw_new)


def pair_counting_ari(a, b):
    """Adjusted Rand index by iterating over all O(n^2) element pairs."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.size
    same_a = same_b = same_both = 0
    for i in range(n):
        for j in range(i + 1, n):
            in_a = a[i] == a[j]
            in_b = b[i] == b[j]
            same_a += in_a
            same_b += in_b
            same_both += in_a and in_b
    total = n * (n - 1) // 2
    expected = same_a * same_b / total
    max_index = (same_a + same_b) / 2
    if max_index == expected:
        return 1.0
    return (same_both - expected) / (max_index - expected)


def nadaraya_watson(taus, values, bandwidth):
    """Gaussian-kernel regression over the grid, one plain loop per node."""
    out = np.empty_like(values)
    for i, tau in enumerate(taus):
        w = np.array([math.exp(-0.5 * ((tau - s) / bandwidth) ** 2) for s in taus])
        out[i] = (w * values).sum() / w.sum()
    return out

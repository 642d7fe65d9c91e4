"""Clustering-quality metrics: adjusted Rand index, label alignment, confusion.

Labelings are 1-based integer arrays.  The adjusted Rand index uses the
contingency-table closed form with exact integer binomials, so it is safe
for sequences up to millions of elements; alignment between true and
predicted labels is found by exhaustive search over label permutations,
which covers the small state counts this package works with.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

MAX_ALIGN_CLASSES = 8


def _check_labeling(labels, what: str) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{what} must be a nonempty 1-D sequence")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{what} must contain integers")
    if np.any(arr < 1):
        raise ValueError(f"{what} labels must be >= 1")
    return arr.astype(int)


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected pair-counting agreement between two labelings.

    Returns 1 for identical partitions (up to relabeling) and about 0 for
    independent ones.
    """
    a = _check_labeling(a, "first labeling")
    b = _check_labeling(b, "second labeling")
    if a.size != b.size:
        raise ValueError(f"labelings differ in length: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValueError("adjusted Rand index needs at least 2 elements")
    _, a_idx = np.unique(a, return_inverse=True)
    _, b_idx = np.unique(b, return_inverse=True)
    n_a = a_idx.max() + 1
    n_b = b_idx.max() + 1
    table = np.zeros((n_a, n_b), dtype=np.int64)
    np.add.at(table, (a_idx, b_idx), 1)
    sum_cells = sum(comb(int(v), 2) for v in table.ravel())
    sum_rows = sum(comb(int(v), 2) for v in table.sum(axis=1))
    sum_cols = sum(comb(int(v), 2) for v in table.sum(axis=0))
    total = comb(a.size, 2)
    expected = sum_rows * sum_cols / total
    max_index = (sum_rows + sum_cols) / 2
    if max_index == expected:
        # Both partitions are trivial (single class each): perfect agreement.
        return 1.0
    return (sum_cells - expected) / (max_index - expected)


def align_labels(truth, pred) -> dict[int, int]:
    """Relabeling of predictions that maximizes the confusion-matrix trace.

    Exhaustive search over permutations of the (at most 8) labels in play;
    ties are broken toward the lexicographically smallest permutation.
    Returns a mapping old predicted label -> aligned label.
    """
    truth = _check_labeling(truth, "truth")
    pred = _check_labeling(pred, "pred")
    if truth.size != pred.size:
        raise ValueError(f"labelings differ in length: {truth.size} vs {pred.size}")
    alphabet = sorted(set(truth.tolist()) | set(pred.tolist()))
    if len(alphabet) > MAX_ALIGN_CLASSES:
        raise ValueError(
            f"alignment by exhaustive search refuses more than {MAX_ALIGN_CLASSES} classes"
        )
    index = {label: k for k, label in enumerate(alphabet)}
    m = len(alphabet)
    counts = np.zeros((m, m), dtype=np.int64)
    for p_label, t_label in zip(pred, truth):
        counts[index[p_label], index[t_label]] += 1
    best_perm = None
    best_trace = -1
    for perm in itertools.permutations(range(m)):
        trace = int(sum(counts[k, perm[k]] for k in range(m)))
        if trace > best_trace:
            best_trace = trace
            best_perm = perm
    return {alphabet[k]: alphabet[best_perm[k]] for k in range(m)}


def relabel(labels, mapping: dict[int, int]) -> np.ndarray:
    """Apply a label mapping elementwise; labels missing from it pass through."""
    labels = _check_labeling(labels, "labels")
    return np.array([mapping.get(int(v), int(v)) for v in labels], dtype=int)


def confusion_matrix(truth, pred) -> np.ndarray:
    """Counts with entry (i, j) = #{t : truth_t = i and pred_t = j}, 1-based."""
    truth = _check_labeling(truth, "truth")
    pred = _check_labeling(pred, "pred")
    if truth.size != pred.size:
        raise ValueError(f"labelings differ in length: {truth.size} vs {pred.size}")
    size = int(max(truth.max(), pred.max()))
    table = np.zeros((size, size), dtype=np.int64)
    np.add.at(table, (truth - 1, pred - 1), 1)
    return table

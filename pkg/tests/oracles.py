"""Independent brute-force reference implementations for the test suite.

Everything here is deliberately written with dict counting and plain
Python loops over histogram cells, sharing no code path with the
package's vectorized estimators.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from hyperband.cube_io import DiscreteSeries, QuantizationConfig, labels_series, quantize_band
from hyperband.selectors import GtEstimate


def entropy_oracle(values) -> float:
    values = list(values)
    n = len(values)
    counts = Counter(values)
    total = 0.0
    for c in counts.values():
        p = c / n
        total -= p * math.log2(p)
    return total


def joint_entropy_oracle(*seqs) -> float:
    return entropy_oracle(list(zip(*[list(s) for s in seqs])))


def mi_oracle(x, y) -> float:
    """Direct double loop over occupied joint cells."""
    x = list(x)
    y = list(y)
    n = len(x)
    cx = Counter(x)
    cy = Counter(y)
    cxy = Counter(zip(x, y))
    total = 0.0
    for (xi, yi), c in cxy.items():
        pxy = c / n
        total += pxy * math.log2(pxy / ((cx[xi] / n) * (cy[yi] / n)))
    return total


def cmi_oracle(a, c, b) -> float:
    """Slice decomposition: sum_b p(b) * I(a; c | b = value)."""
    a = list(a)
    c = list(c)
    b = list(b)
    n = len(b)
    total = 0.0
    for value, weight in Counter(b).items():
        a_slice = [ai for ai, bi in zip(a, b) if bi == value]
        c_slice = [ci for ci, bi in zip(c, b) if bi == value]
        total += (weight / n) * mi_oracle(a_slice, c_slice)
    return total


def jmi_oracle(a, b, c) -> float:
    """Pair-encode (a, b) into one symbol, then plain MI with c."""
    pair = list(zip(list(a), list(b)))
    return mi_oracle(pair, c)


def greedy_jmi_oracle(cube, gt, cfg: QuantizationConfig, k: int):
    """Step-wise brute-force JMI forward selection, recomputed from scratch.

    Mirrors the selector contract (argmax-MI start, lowest-index ties,
    GTest <- (GTest + band)/2) but every criterion value comes from the
    dict-counting oracles above and the estimate is re-averaged from the
    raw band values at each step.
    """
    labels = list(labels_series(gt).bins)

    def band_series(i):
        return list(quantize_band(cube, i, gt, cfg).bins)

    n_bands = cube.n_bands
    profile = [mi_oracle(band_series(i), labels) for i in range(n_bands)]
    first = max(range(n_bands), key=lambda i: (profile[i], -i))
    selected = [first]
    values = [profile[first]]

    while len(selected) < k:
        est = GtEstimate.from_band(cube, gt, selected[0])
        for later in selected[1:]:
            band_vals = cube.band(later).ravel()[est.pixel_index].astype(float)
            est = GtEstimate((est.values + band_vals) / 2.0, est.source_bands + (later,),
                             est.pixel_index)
        gtq = list(est.quantized(cfg).bins)
        best_band, best_value = -1, -math.inf
        for cand in range(n_bands):
            if cand in selected:
                continue
            value = jmi_oracle(gtq, band_series(cand), labels)
            if value > best_value:
                best_band, best_value = cand, value
        selected.append(best_band)
        values.append(best_value)
    return selected, values


def chance_accuracy_oracle(true_labels: np.ndarray, predicted: np.ndarray) -> float:
    """Expected accuracy (percent) if predictions were independent of truth.

    Computed from the two marginals only: sum_c p_true(c) * p_pred(c).
    """
    n = len(true_labels)
    classes = np.unique(np.concatenate([true_labels, predicted]))
    total = 0.0
    for c in classes:
        total += (np.sum(true_labels == c) / n) * (np.sum(predicted == c) / n)
    return 100.0 * total


def random_series(rng: np.random.Generator, length: int, n_bins: int) -> DiscreteSeries:
    return DiscreteSeries(rng.integers(0, n_bins, size=length, dtype=np.int64), n_bins)

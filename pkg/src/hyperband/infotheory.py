"""Histogram (plug-in) estimators for discrete information measures.

All quantities are in bits (log base 2) and use the maximum-likelihood
histogram estimate of the underlying pmf with the 0*log(0) = 0
convention. No bias correction is applied: selection criteria built on
these estimators must rank candidates exactly as the raw plug-in values
do.

Definitions, for discrete series x, y, a, b, c of equal length:

  entropy             H(x)        = -sum_i p_i log2 p_i
  joint entropy       H(x1..xm)   = entropy of the product-space histogram
  mutual information  I(x;y)      = sum_xy p(x,y) log2[ p(x,y) / (p(x)p(y)) ]
  conditional MI      I(a;c|b)    = H(c|b) - H(c|a,b)
  joint MI            JMI(a,b;c)  = H(c) - H(c|a,b) = I(b;c) + I(a;c|b)

Conditional MI and joint MI are non-negative for exact pmfs; tiny
negative rounding residues in [-1e-12, 0) are clamped to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube_io import DiscreteSeries

# Above this cell count JointHistogram switches to sparse storage;
# 256*256*16 (the default band/band/label product space) stays dense.
DENSE_CELL_LIMIT = 1 << 20

_NEG_CLAMP = -1e-12


def _validate_lengths(xs: list[DiscreteSeries] | tuple[DiscreteSeries, ...]) -> int:
    if not 1 <= len(xs) <= 3:
        raise ValueError(f"expected 1-3 series, got {len(xs)}")
    n = xs[0].length
    if n == 0:
        raise ValueError("series must be non-empty")
    for s in xs[1:]:
        if s.length != n:
            raise ValueError(f"series length mismatch: {n} vs {s.length}")
    return n


def _fused_codes(xs: tuple[DiscreteSeries, ...]) -> np.ndarray:
    """Mixed-radix codes of the per-sample tuples; int64 stays exact here."""
    codes = xs[0].bins.astype(np.int64)
    for s in xs[1:]:
        codes = codes * s.n_bins + s.bins
    return codes


def _occupied_counts(xs: tuple[DiscreteSeries, ...]) -> np.ndarray:
    """Counts of the occupied product-space cells (order irrelevant to entropy)."""
    return np.unique(_fused_codes(xs), return_counts=True)[1]


def _entropy_of_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    p = counts / total
    return float(-(p * np.log2(p)).sum() + 0.0)  # +0.0 normalizes -0.0


@dataclass(frozen=True)
class JointHistogram:
    """Joint counts of 1-3 series over their product bin space.

    Dense ndarray storage up to DENSE_CELL_LIMIT cells, otherwise a
    sparse map from fused cell code to count.
    """

    dims: tuple[int, ...]
    counts: np.ndarray | dict  # dense ndarray of shape dims, or {code: count}
    total: int

    @classmethod
    def from_series(cls, xs: list[DiscreteSeries] | tuple[DiscreteSeries, ...]) -> "JointHistogram":
        xs = tuple(xs)
        n = _validate_lengths(xs)
        dims = tuple(s.n_bins for s in xs)
        codes = _fused_codes(xs)
        n_cells = int(np.prod(dims))
        if n_cells <= DENSE_CELL_LIMIT:
            dense = np.bincount(codes, minlength=n_cells).reshape(dims)
            return cls(dims, dense, n)
        uniq, cnt = np.unique(codes, return_counts=True)
        return cls(dims, dict(zip(uniq.tolist(), cnt.tolist())), n)

    @property
    def is_dense(self) -> bool:
        return isinstance(self.counts, np.ndarray)

    def nonzero_counts(self) -> np.ndarray:
        if self.is_dense:
            flat = self.counts.ravel()
            return flat[flat > 0]
        return np.asarray(list(self.counts.values()), dtype=np.int64)

    def marginal(self, axis: int) -> "JointHistogram":
        """Histogram with the given axis summed out."""
        if not 0 <= axis < len(self.dims):
            raise ValueError(f"axis {axis} out of range for dims {self.dims}")
        if len(self.dims) == 1:
            raise ValueError("cannot marginalize a 1-D histogram")
        if self.is_dense:
            reduced = self.counts.sum(axis=axis)
            return JointHistogram(tuple(reduced.shape), reduced, self.total)
        # sparse: decode the axis digit out of each fused code
        keep_dims = tuple(d for i, d in enumerate(self.dims) if i != axis)
        out: dict[int, int] = {}
        for code, cnt in self.counts.items():
            digits = []
            c = code
            for d in reversed(self.dims):
                digits.append(c % d)
                c //= d
            digits.reverse()
            del digits[axis]
            new_code = 0
            for digit, d in zip(digits, keep_dims):
                new_code = new_code * d + digit
            out[new_code] = out.get(new_code, 0) + cnt
        return JointHistogram(keep_dims, out, self.total)

    def entropy_bits(self) -> float:
        return _entropy_of_counts(self.nonzero_counts())


def entropy(x: DiscreteSeries) -> float:
    """Shannon entropy of one series, in bits."""
    _validate_lengths((x,))
    counts = np.bincount(x.bins, minlength=x.n_bins)
    return _entropy_of_counts(counts[counts > 0])


def joint_entropy(xs: list[DiscreteSeries] | tuple[DiscreteSeries, ...]) -> float:
    """Joint entropy of 1-3 equal-length series, in bits."""
    xs = tuple(xs)
    _validate_lengths(xs)
    return _entropy_of_counts(_occupied_counts(xs))


def mutual_information(x: DiscreteSeries, y: DiscreteSeries) -> float:
    """I(x;y) by direct summation over occupied joint cells.

    Agrees with H(x) + H(y) - H(x,y) to well below 1e-10.
    """
    _validate_lengths((x, y))
    n = x.length
    codes = _fused_codes((x, y))
    uniq, cxy = np.unique(codes, return_counts=True)
    cx = np.bincount(x.bins, minlength=x.n_bins)
    cy = np.bincount(y.bins, minlength=y.n_bins)
    xi = uniq // y.n_bins
    yi = uniq % y.n_bins
    p = cxy / n
    # log2( p(x,y) / (p(x) p(y)) ) computed on integer counts: c_xy * n / (c_x * c_y)
    ratio = cxy.astype(np.float64) * n / (cx[xi].astype(np.float64) * cy[yi])
    return float((p * np.log2(ratio)).sum())


def conditional_mi(a: DiscreteSeries, c: DiscreteSeries, given_b: DiscreteSeries) -> float:
    """I(a;c | b) = H(c|b) - H(c|a,b), clamped to zero on rounding residue."""
    b = given_b
    _validate_lengths((a, c, b))
    h_cb = _entropy_of_counts(_occupied_counts((c, b)))
    h_b = entropy(b)
    h_ab = _entropy_of_counts(_occupied_counts((a, b)))
    h_abc = _entropy_of_counts(_occupied_counts((a, b, c)))
    value = (h_cb - h_b) - (h_abc - h_ab)
    return _clamp_nonneg(value)


def joint_mi(a: DiscreteSeries, b: DiscreteSeries, c: DiscreteSeries) -> float:
    """JMI(a,b;c) = H(c) - H(c|a,b): what the pair (a,b) says about c."""
    _validate_lengths((a, b, c))
    h_c = entropy(c)
    h_ab = _entropy_of_counts(_occupied_counts((a, b)))
    h_abc = _entropy_of_counts(_occupied_counts((a, b, c)))
    value = h_c - (h_abc - h_ab)
    return _clamp_nonneg(value)


def _clamp_nonneg(value: float) -> float:
    if _NEG_CLAMP <= value < 0.0:
        return 0.0
    return value

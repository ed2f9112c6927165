"""Binary soft-margin SVM trained by sequential minimal optimization.

Solves the standard dual

    min_a  0.5 a'Qa - e'a   s.t.  y'a = 0,  0 <= a <= C,   Q_st = y_s y_t K_st

with maximal-violating-pair working-set selection refined by the
second-order gain criterion, operating on a precomputed kernel matrix.
Convergence is declared when the duality-gap bound m - M drops below
``tol`` (the usual KKT violation measure); the solver is deterministic,
all argmax ties resolving to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TAU = 1e-12


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||x - z||^2) for all row pairs of a (n,d) and b (m,d)."""
    sq_a = (a * a).sum(axis=1)[:, None]
    sq_b = (b * b).sum(axis=1)[None, :]
    d2 = sq_a + sq_b - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


def linear_kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b.T


def kernel_matrix(kind: str, a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    if kind == "rbf":
        return rbf_kernel(a, b, gamma)
    if kind == "linear":
        return linear_kernel(a, b)
    raise ValueError(f"unknown kernel {kind!r}, expected 'rbf' or 'linear'")


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    iterations: int
    converged: bool
    kkt_gap: float  # final m - M violation bound


def smo_solve(K: np.ndarray, y: np.ndarray, C: float,
              tol: float = 1e-3, max_iter: int | None = None) -> SmoResult:
    """Solve the dual for one binary problem on kernel matrix K.

    Parameters
    ----------
    K : (n, n) kernel matrix of the training samples.
    y : (n,) labels in {-1, +1}.
    C : box constraint, > 0.
    tol : KKT stopping tolerance on the violation gap.
    max_iter : iteration cap; defaults to max(20000, 60 n). The solver
        returns the current iterate when the cap is hit (converged=False).
    """
    n = K.shape[0]
    if K.shape != (n, n):
        raise ValueError("kernel matrix must be square")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise ValueError("labels must match the kernel matrix size")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be -1 or +1")
    if C <= 0:
        raise ValueError("C must be positive")
    if max_iter is None:
        max_iter = max(20_000, 60 * n)

    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    Kd = np.ascontiguousarray(np.diag(K))
    pos = y > 0

    m = np.inf
    M = -np.inf
    it = 0
    for it in range(1, max_iter + 1):
        v = -y * grad  # equals the implied bias at free points
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        if not up.any() or not low.any():
            break
        v_up = np.where(up, v, -np.inf)
        i = int(np.argmax(v_up))
        m = v_up[i]
        M = np.min(np.where(low, v, np.inf))
        if m - M < tol:
            break

        # second-order choice of j: maximize (m - v_j)^2 / curvature over
        # violating candidates in I_low
        b_vec = m - v
        curv = Kd[i] + Kd - 2.0 * K[i]
        np.maximum(curv, _TAU, out=curv)
        valid = low & (b_vec > 0)
        gain = np.where(valid, b_vec * b_vec / curv, -np.inf)
        j = int(np.argmax(gain))

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        quad = Kd[i] + Kd[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = _TAU

        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            else:
                if aj > C:
                    aj, ai = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            else:
                if ai < 0:
                    ai, aj = 0.0, total

        d_i = ai - ai_old
        d_j = aj - aj_old
        alpha[i] = ai
        alpha[j] = aj
        grad += (y * yi * K[i]) * d_i + (y * yj * K[j]) * d_j

    # recompute the final violation interval for the bias and the gap
    v = -y * grad
    up = np.where(pos, alpha < C, alpha > 0)
    low = np.where(pos, alpha > 0, alpha < C)
    if up.any() and low.any():
        m = float(np.max(np.where(up, v, -np.inf)))
        M = float(np.min(np.where(low, v, np.inf)))
        bias = 0.5 * (m + M)
        gap = m - M
    else:
        bias = float(np.median(v))
        gap = 0.0
    return SmoResult(alpha=alpha, bias=bias, iterations=it,
                     converged=gap < tol, kkt_gap=float(gap))


@dataclass(frozen=True)
class BinaryMachine:
    """One trained one-vs-one machine: positive class vs negative class."""

    pos_class: int
    neg_class: int
    support: np.ndarray       # row indices into the training sample matrix
    dual_coef: np.ndarray     # alpha_t * y_t at the support rows
    bias: float
    iterations: int
    converged: bool

    def decision(self, K_test_support: np.ndarray) -> np.ndarray:
        """Decision values from a (n_test, n_support) kernel block."""
        return K_test_support @ self.dual_coef + self.bias

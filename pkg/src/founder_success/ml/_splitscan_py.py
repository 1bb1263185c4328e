"""Pure-numpy split-scan kernels (fallback for the compiled ``_splitscan``).

Same contract and the same floating-point operation order as the Cython
version: ``np.cumsum`` accumulates sequentially, so left-side sums match the
compiled running sums bit for bit.
"""

from __future__ import annotations

import numpy as np


def _pick(score: np.ndarray, valid: np.ndarray) -> tuple[int, int, float]:
    score = np.where(valid, score, -np.inf)
    best_col, best_pos, best = -1, 0, -np.inf
    rows = np.argmax(score, axis=0)
    for j, r in enumerate(rows):
        s = score[r, j]
        if s > best:
            best, best_col, best_pos = float(s), j, int(r) + 1
    return best_col, best_pos, best


def _valid(xs: np.ndarray, min_leaf: int) -> np.ndarray:
    n = xs.shape[0]
    left = np.arange(1, n)
    size_ok = (left >= max(min_leaf, 1)) & (left <= n - max(min_leaf, 1))
    return (xs[:-1] < xs[1:]) & size_ok[:, None]


def scan_gini(xs: np.ndarray, ys: np.ndarray, min_leaf: int) -> tuple[int, int, float]:
    n = xs.shape[0]
    if n < 2:
        return -1, 0, -np.inf
    cum = np.cumsum(ys, axis=0)
    acc = cum[:-1]
    tot = cum[-1]
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = float(n) - nl
    negl = nl - acc
    pr = tot - acc
    negr = nr - pr
    with np.errstate(divide="ignore", invalid="ignore"):
        score = (acc * acc + negl * negl) / nl + (pr * pr + negr * negr) / nr
    return _pick(score, _valid(xs, min_leaf))


def scan_newton(
    xs: np.ndarray, gs: np.ndarray, hs: np.ndarray, lam: float, min_leaf: int
) -> tuple[int, int, float]:
    n = xs.shape[0]
    if n < 2:
        return -1, 0, -np.inf
    cg = np.cumsum(gs, axis=0)
    ch = np.cumsum(hs, axis=0)
    gl, hl = cg[:-1], ch[:-1]
    gr = cg[-1] - gl
    hr = ch[-1] - hl
    with np.errstate(divide="ignore", invalid="ignore"):
        score = gl * gl / (hl + lam) + gr * gr / (hr + lam)
    return _pick(score, _valid(xs, min_leaf))

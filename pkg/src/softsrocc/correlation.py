"""Exact correlation and ranking primitives.

These are the non-differentiable references that the smoothed ranking in
:mod:`softsrocc.soft_rank` converges to.
"""

import numpy as np

from .errors import DegenerateVariance, LengthMismatch, NonFinite


def as_scores(x, name="scores", min_len=1):
    """Validate ``x`` as a finite 1-D float64 score vector."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_len:
        raise ValueError(f"{name} needs at least {min_len} element(s), got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return arr


def check_ids(ids, n):
    if ids is None:
        return None
    ids = [str(i) for i in ids]
    if len(ids) != n:
        raise LengthMismatch(f"{len(ids)} ids for {n} values")
    if len(set(ids)) != n:
        raise ValueError("sample ids must be pairwise distinct")
    return ids


def _pair(a, b, min_len):
    a = as_scores(a, "a", min_len)
    b = as_scores(b, "b", 1)
    if a.shape != b.shape:
        raise LengthMismatch(f"length {a.shape[0]} vs {b.shape[0]}")
    return a, b


def plcc(a, b):
    """Pearson linear correlation coefficient.

    Raises DegenerateVariance when either vector is constant.
    """
    a, b = _pair(a, b, 2)
    da = a - a.mean()
    db = b - b.mean()
    ssa = float(da @ da)
    ssb = float(db @ db)
    if ssa == 0.0 or ssb == 0.0:
        raise DegenerateVariance("constant input: correlation undefined")
    r = float(da @ db) / (np.sqrt(ssa) * np.sqrt(ssb))
    return float(np.clip(r, -1.0, 1.0))


def hard_rank(x):
    """Rank as a cumulative Heaviside sum, ``sum_j H(x_i - x_j)`` with ``H(0) = 1/2``.

    The self term contributes 1/2, so tie-free input yields 0-based rank + 1/2
    and tied values share the average of their positions. Computed in
    O(n log n) via sorting; ``sum(ranks) == n**2 / 2`` exactly.
    """
    x = as_scores(x, "x")
    s = np.sort(x)
    below = np.searchsorted(s, x, side="left")
    through = np.searchsorted(s, x, side="right")
    return below + 0.5 * (through - below)


def srocc(q, qhat):
    """Spearman correlation as PLCC of fractional hard ranks; handles ties."""
    q, qhat = _pair(q, qhat, 2)
    try:
        return plcc(hard_rank(q), hard_rank(qhat))
    except DegenerateVariance:
        raise DegenerateVariance("all-tie input: rank correlation undefined") from None


def srocc_closed_form(q, qhat):
    """``1 - 6 sum d^2 / (n (n^2 - 1))``; valid only for tie-free input."""
    q, qhat = _pair(q, qhat, 2)
    if np.unique(q).size != q.size or np.unique(qhat).size != qhat.size:
        raise ValueError("closed-form SROCC requires tie-free input")
    n = q.shape[0]
    d = hard_rank(q) - hard_rank(qhat)
    return 1.0 - 6.0 * float(d @ d) / (n * (n * n - 1.0))

"""Prior-art ranking objectives used for comparison.

* ``margin_rank_loss``: pairwise hinge over all ordered pairs.
* ``permutahedron_project``: the LP-style soft sort, an exact Euclidean
  projection onto the permutahedron solved by isotonic regression.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .correlation import as_scores
from .errors import InvalidConfig, LengthMismatch, NonFinite
from .soft_rank import GradTaggedScores, LossResult


@dataclass(frozen=True)
class ProjectionConfig:
    beta: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise InvalidConfig(f"beta must be positive, got {self.beta}", "beta")


def margin_rank_loss(qhat, q, order="predicted"):
    """Sum over all ordered pairs of ``max(0, |qhat_i - qhat_j| - e_ij (q_i - q_j))``.

    With ``order="predicted"`` (default) ``e_ij = +1`` if ``qhat_i >= qhat_j``
    else -1. ``order="truth"`` takes the sign from ``q`` instead. Each
    unordered pair is counted twice and ``i == j`` terms are zero.

    The returned gradient is a subgradient: ``e`` is held constant, the hinge
    contributes 0 at its kink, and under ``order="truth"`` ``|u|`` has slope 0
    at ``u = 0``.
    """
    if order not in ("predicted", "truth"):
        raise ValueError(f"order must be 'predicted' or 'truth', got {order!r}")
    tagged = qhat if isinstance(qhat, GradTaggedScores) else GradTaggedScores(qhat)
    pred = tagged.values
    if not np.all(np.isfinite(pred)):
        raise NonFinite("qhat contains NaN or Inf")
    q = as_scores(q, "q")
    if q.shape != pred.shape:
        raise LengthMismatch(f"length {pred.shape[0]} vs {q.shape[0]}")
    total, grad = kernels.margin_pairs(pred, q, use_truth_order=(order == "truth"))
    grad[~tagged.grad_mask] = 0.0
    return LossResult(total, grad)


def margin_loss_cost(n):
    """Ordered-pair evaluations in ``margin_rank_loss``: ``n**2``."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * n


def permutahedron_project(x, cfg=None):
    """``argmin_{z in conv(perms of 1..n)} 0.5 * ||z + x / beta||^2``.

    Note the sign: this projects ``-x / beta``, so larger ``x`` receive
    *smaller* coordinates, and as ``beta -> 0`` the output tends to the
    descending-rank vector (largest ``x`` gets 1). The result always sums to
    ``n (n + 1) / 2``.

    Uses the reduction to isotonic regression: sort the point in decreasing
    order, fit a non-increasing sequence to ``sorted - (n, ..., 1)`` by pool
    adjacent violators, subtract, and undo the sort. O(n log n).
    """
    if cfg is None:
        cfg = ProjectionConfig()
    elif not isinstance(cfg, ProjectionConfig):
        cfg = ProjectionConfig(beta=float(cfg))
    x = as_scores(x, "x")
    n = x.shape[0]
    w = -x / cfg.beta
    order = np.argsort(-w, kind="stable")
    w_sorted = w[order]
    anchors = np.arange(n, 0, -1, dtype=np.float64)
    fit = kernels.pav_decreasing(w_sorted - anchors)
    out = np.empty(n)
    out[order] = w_sorted - fit
    return out


def permutahedron_feasible(z, tol=1e-9):
    """Majorization check: ``z`` lies in the permutahedron of ``1..n`` (within ``tol``)."""
    z = np.asarray(z, dtype=np.float64)
    n = z.shape[0]
    top = np.cumsum(np.sort(z)[::-1])
    bound = np.cumsum(np.arange(n, 0, -1, dtype=np.float64))
    return bool(np.all(top <= bound + tol) and abs(top[-1] - bound[-1]) <= tol)

"""Tanh-smoothed ranking and the monotonicity loss built on it.

``soft_rank`` replaces the Heaviside step in :func:`softsrocc.correlation.hard_rank`
with ``(1 + tanh(k u)) / 2``. ``mono_loss`` is the negated Pearson correlation
between the soft ranks of the labels and of the predictions, returned together
with its exact gradient.

Notation: the steepness ``k`` lives in :class:`SoftRankConfig`; loop indices
are plain ``i``/``j`` and never mean steepness.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .correlation import as_scores, check_ids
from .errors import InvalidConfig, LengthMismatch, NonFinite

DEFAULT_STEEPNESS = 10.0


@dataclass(frozen=True)
class SoftRankConfig:
    steepness: float = DEFAULT_STEEPNESS
    eps: float = 1e-12

    def __post_init__(self):
        if not (np.isfinite(self.steepness) and self.steepness > 0):
            raise InvalidConfig(f"steepness must be positive, got {self.steepness}", "steepness")
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise InvalidConfig(f"eps must be positive, got {self.eps}", "eps")


@dataclass
class GradTaggedScores:
    """Scores where ``grad_mask[i]`` marks live optimisation variables.

    Masked-off entries are constants: they shape everyone's ranks but get no
    gradient.
    """

    values: np.ndarray
    grad_mask: np.ndarray = None
    ids: list = None

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("values must be a non-empty 1-D vector")
        if self.grad_mask is None:
            self.grad_mask = np.ones(self.values.shape[0], dtype=bool)
        else:
            self.grad_mask = np.asarray(self.grad_mask, dtype=bool)
        if self.grad_mask.shape != self.values.shape:
            raise LengthMismatch("grad_mask and values differ in length")
        self.ids = check_ids(self.ids, self.values.shape[0])


@dataclass
class LossResult:
    loss: float
    grad: np.ndarray
    degenerate: bool = False
    extras: dict = field(default_factory=dict)


def _tagged(qhat):
    if isinstance(qhat, GradTaggedScores):
        return qhat
    return GradTaggedScores(qhat)


def _cfg(cfg):
    if cfg is None:
        return SoftRankConfig()
    if isinstance(cfg, SoftRankConfig):
        return cfg
    return SoftRankConfig(steepness=float(cfg))


def soft_rank(x, cfg=None):
    """Smoothed rank ``r_i = sum_j (1 + tanh(k (x_i - x_j))) / 2``.

    The self term contributes exactly 1/2, so ``sum(r) == n**2 / 2`` up to
    rounding for every ``k``. As ``k`` grows, ``r`` tends to ``hard_rank(x)``
    on tie-free input. ``cfg`` may be a :class:`SoftRankConfig` or a bare
    steepness.
    """
    cfg = _cfg(cfg)
    x = as_scores(x, "x")
    return kernels.soft_rank(x, cfg.steepness)


def soft_rank_jacobian(x, cfg=None):
    """Dense ``J[i, j] = d soft_rank(x)_i / d x_j`` (symmetric, zero row sums)."""
    cfg = _cfg(cfg)
    x = as_scores(x, "x")
    return kernels.soft_rank_jacobian(x, cfg.steepness)


def soft_rank_vjp(x, g, cfg=None):
    """``J^T g`` in O(n^2) time and O(n) memory."""
    cfg = _cfg(cfg)
    x = as_scores(x, "x")
    g = np.ascontiguousarray(g, dtype=np.float64)
    if g.shape != x.shape:
        raise LengthMismatch("cotangent and x differ in length")
    return kernels.soft_rank_vjp(x, cfg.steepness, g)


def mono_loss(qhat, q, cfg=None):
    """Negated PLCC of soft ranks, with gradient w.r.t. the live entries of ``qhat``.

    ``qhat`` is a :class:`GradTaggedScores` or a plain vector (all entries
    live). If either centred soft-rank vector has norm below ``cfg.eps`` the
    correlation is undefined; the result is then loss 0, zero gradient and
    ``degenerate=True``.
    """
    cfg = _cfg(cfg)
    tagged = _tagged(qhat)
    pred = tagged.values
    if not np.all(np.isfinite(pred)):
        raise NonFinite("qhat contains NaN or Inf")
    q = as_scores(q, "q")
    if q.shape != pred.shape:
        raise LengthMismatch(f"length {pred.shape[0]} vs {q.shape[0]}")
    if pred.shape[0] < 2:
        raise ValueError("mono_loss needs at least 2 samples")

    k = cfg.steepness
    r = kernels.soft_rank(q, k)
    rh = kernels.soft_rank(pred, k)
    a = r - r.mean()
    b = rh - rh.mean()
    na = float(np.sqrt(a @ a))
    nb = float(np.sqrt(b @ b))
    if na < cfg.eps or nb < cfg.eps:
        return LossResult(0.0, np.zeros_like(pred), degenerate=True)

    rho = float(a @ b) / (na * nb)
    # d(-rho)/d(rh); the centring projection is a no-op because a and b are centred
    cot = -(a / (na * nb) - rho * b / (nb * nb))
    grad = kernels.soft_rank_vjp(pred, k, cot)
    grad[~tagged.grad_mask] = 0.0
    return LossResult(-float(np.clip(rho, -1.0, 1.0)), grad)


def mono_loss_cost(n):
    """Pairwise tanh evaluations needed for one full soft-rank vector: ``n**2``."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * n

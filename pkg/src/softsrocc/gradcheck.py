"""Finite-difference checks for the analytic gradients.

Errors are normwise, ``max|analytic - fd| / max(|analytic|_inf, |fd|_inf, GRAD_FLOOR)``.
Under a steep tanh, well-separated points have derivatives that underflow
far below what any float64 difference quotient resolves; an elementwise
ratio would then measure rounding noise. ``GRAD_FLOOR`` sits above the
stencil's rounding noise (about ``eps / fd_step(k)``) and below any gradient
that matters for training.
"""

from dataclasses import dataclass, field

import numpy as np

from .soft_rank import GradTaggedScores, SoftRankConfig, mono_loss, soft_rank, soft_rank_jacobian

DEFAULT_THRESHOLD = 1e-5
STEEP_THRESHOLD = 1e-4
STEEP_K = 1000.0
GRAD_FLOOR = 1e-6


def _diff_along(f, x, j, h, order):
    orig = x[j]

    def at(step):
        x[j] = orig + step
        val = np.array(f(x), dtype=np.float64)
        x[j] = orig
        return val

    if order == 2:
        return (at(h) - at(-h)) / (2.0 * h)
    if order == 4:
        return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h)
    raise ValueError("order must be 2 or 4")


def central_diff(f, x, h, order=2):
    """Gradient of scalar ``f`` at ``x`` by central differences (2nd or 4th order)."""
    x = np.array(x, dtype=np.float64)
    return np.array([float(_diff_along(f, x, j, h, order)) for j in range(x.size)])


def central_diff_jacobian(f, x, h, order=2):
    """Jacobian of vector-valued ``f``; column ``j`` is ``d f / d x_j``."""
    x = np.array(x, dtype=np.float64)
    return np.stack([_diff_along(f, x, j, h, order) for j in range(x.size)], axis=1)


def rel_error(analytic, numeric, floor=0.0):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.max(np.abs(analytic), initial=0.0), np.max(np.abs(numeric), initial=0.0), floor)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric)) / scale)


def fd_step(k):
    # resolves both the tanh width 1/k and clustered-rank curvature at small k
    return min(1e-4, 1e-2 / k)


def threshold_for(k):
    return STEEP_THRESHOLD if k >= STEEP_K else DEFAULT_THRESHOLD


@dataclass
class CheckRecord:
    suite: str
    n: int
    k: float
    seed: int
    error: float
    threshold: float

    @property
    def passed(self):
        return self.error < self.threshold


@dataclass
class GradcheckReport:
    records: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    @property
    def worst(self):
        if not self.records:
            return None
        return max(self.records, key=lambda r: r.error / r.threshold)

    def by_suite(self):
        out = {}
        for r in self.records:
            out.setdefault(r.suite, []).append(r)
        return out


def random_instance(rng, n):
    """Scores in [0, 1] plus a random live mask with at least one live entry."""
    q = rng.uniform(0.0, 1.0, n)
    qhat = rng.uniform(0.0, 1.0, n)
    mask = rng.random(n) < 0.7
    mask[rng.integers(n)] = True
    return q, qhat, mask


def check_mono_loss(q, qhat, mask, k):
    cfg = SoftRankConfig(k)
    res = mono_loss(GradTaggedScores(qhat, mask), q, cfg)
    live = np.flatnonzero(mask)

    def f(sub):
        v = qhat.copy()
        v[live] = sub
        return mono_loss(v, q, cfg).loss

    fd = central_diff(f, qhat[live], fd_step(k), order=4)
    leak = float(np.max(np.abs(res.grad[~mask]), initial=0.0))
    return max(rel_error(res.grad[live], fd, GRAD_FLOOR), leak)


def check_jacobian(x, k, h=None, order=4):
    cfg = SoftRankConfig(k)
    jac = soft_rank_jacobian(x, cfg)
    fd = central_diff_jacobian(lambda v: soft_rank(v, cfg), x, fd_step(k) if h is None else h, order)
    return rel_error(jac, fd, GRAD_FLOOR)


def run_soft_rank_suite(n=8, k=10.0, seed=0, trials=100, report=None):
    report = GradcheckReport() if report is None else report
    rng = np.random.default_rng(seed)
    tol = threshold_for(k)
    for t in range(trials):
        q, qhat, mask = random_instance(rng, n)
        report.records.append(CheckRecord("jacobian", n, k, seed + t, check_jacobian(qhat, k), tol))
        report.records.append(CheckRecord("mono_loss", n, k, seed + t, check_mono_loss(q, qhat, mask, k), tol))
    return report


def check_train_objective(seed=0, n=40, d=4, hidden=6, k=10.0, lambda_mono=1.0, bank_size=20):
    """FD audit of the composite objective's parameter gradient.

    A bank is pre-filled with ``bank_size`` remembered samples so the check
    covers the live/constant split of the assembled loss.
    """
    # local import: harness pulls in the memory bank and training loop
    from .harness import Predictor, TrainConfig, batch_objective, gen_synthetic
    from .memory_bank import MemoryBank

    ds = gen_synthetic(seed, n=max(n, 10), d=d, noise_sigma=0.1, heteroscedastic=True)
    rng = np.random.default_rng(seed)
    predictor = Predictor(d, hidden, seed=seed)
    theta = predictor.get_params() + rng.normal(scale=0.3, size=predictor.n_params)
    predictor.set_params(theta)
    bank = MemoryBank(1)
    idx = rng.permutation(len(ds))
    remembered, batch = idx[:bank_size], idx[bank_size : bank_size + 8]
    bank.update([ds.ids[i] for i in remembered], rng.uniform(0, 1, len(remembered)), ds.mos[remembered], 0)
    cfg = TrainConfig(loss_mode="mse_plus_mono_bank", lambda_mono=lambda_mono, steepness=k, batch_size=8)
    x, mos, ids = ds.features[batch], ds.mos[batch], [ds.ids[i] for i in batch]
    _, grad, _ = batch_objective(predictor, x, mos, ids, cfg, bank)

    def f(th):
        predictor.set_params(th)
        return batch_objective(predictor, x, mos, ids, cfg, bank)[0]

    fd = central_diff(f, theta, 1e-4, order=4)
    predictor.set_params(theta)
    return rel_error(grad, fd, GRAD_FLOOR)


def run_train_suite(seed=0, trials=3, report=None, threshold=1e-4):
    report = GradcheckReport() if report is None else report
    for t in range(trials):
        err = check_train_objective(seed=seed + t)
        report.records.append(CheckRecord("train_objective", 8, 10.0, seed + t, err, threshold))
    return report

"""Desk-scale training experiment: synthetic quality data, a small MLP with
hand-written backprop, and SGD on MSE with optional monotonicity terms.

The synthetic task is a monotone regression ``mos = g(w . x) + noise`` whose
noise grows with the latent quality. MSE then spends most of its effort on
the noisy high-quality end, which leaves room for a rank objective to help
the ordering elsewhere.
"""

from dataclasses import asdict, dataclass
import math

import numpy as np

from .correlation import plcc, srocc
from .errors import DivergenceDetected, InvalidConfig
from .memory_bank import MemoryBank
from .soft_rank import GradTaggedScores, SoftRankConfig, mono_loss

LOSS_MODES = ("mse_only", "mse_plus_mono", "mse_plus_mono_bank")


@dataclass
class SyntheticDataset:
    features: np.ndarray
    mos: np.ndarray
    ids: list
    generator_seed: int
    latent: np.ndarray

    def __len__(self):
        return self.mos.shape[0]

    def subset(self, idx):
        idx = np.asarray(idx)
        return SyntheticDataset(
            self.features[idx], self.mos[idx], [self.ids[i] for i in idx], self.generator_seed, self.latent[idx]
        )


def quality_curve(z):
    """The fixed strictly increasing map from latent quality to MOS scale."""
    return 1.0 / (1.0 + np.exp(-2.0 * z))


def gen_synthetic(seed, n=500, d=8, noise_sigma=0.15, heteroscedastic=True):
    """Draw ``n`` samples of the monotone regression task.

    With ``heteroscedastic`` the noise standard deviation is
    ``noise_sigma * g(z)**2`` (near zero for poor samples, largest for the
    best ones); otherwise it is ``noise_sigma``. Bit-identical per seed.
    """
    if n < 10:
        raise InvalidConfig("n must be >= 10", "n")
    if d < 1:
        raise InvalidConfig("d must be >= 1", "d")
    if not noise_sigma >= 0:
        raise InvalidConfig("noise_sigma must be >= 0", "noise_sigma")
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    w /= np.linalg.norm(w)
    x = rng.normal(size=(n, d))
    z = x @ w
    clean = quality_curve(z)
    scale = noise_sigma * clean**2 if heteroscedastic else np.full(n, float(noise_sigma))
    mos = clean + scale * rng.normal(size=n)
    ids = [f"s{seed}_{i:05d}" for i in range(n)]
    return SyntheticDataset(x, mos, ids, int(seed), z)


def split_kfold(dataset, folds=5, fold_index=0, seed=0):
    """Shuffled k-fold split by sample; returns ``(train, test)``."""
    if folds < 2:
        raise InvalidConfig("folds must be >= 2", "folds")
    if not 0 <= fold_index < folds:
        raise InvalidConfig(f"fold_index must be in [0, {folds})", "fold_index")
    n = len(dataset)
    if n < folds:
        raise InvalidConfig("fewer samples than folds", "folds")
    perm = np.random.default_rng(seed).permutation(n)
    parts = np.array_split(perm, folds)
    test = np.sort(parts[fold_index])
    train = np.sort(np.concatenate([p for i, p in enumerate(parts) if i != fold_index]))
    return dataset.subset(train), dataset.subset(test)


class Predictor:
    """Two-layer perceptron ``d -> h (tanh) -> 1`` with manual backprop."""

    def __init__(self, d, hidden=16, seed=0):
        rng = np.random.default_rng(seed)
        self.w1 = rng.normal(scale=1.0 / math.sqrt(d), size=(hidden, d))
        self.b1 = np.zeros(hidden)
        self.w2 = rng.normal(scale=1.0 / math.sqrt(hidden), size=hidden)
        self.b2 = 0.5

    @property
    def n_params(self):
        return self.w1.size + self.b1.size + self.w2.size + 1

    def get_params(self):
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])

    def set_params(self, theta):
        h, d = self.w1.shape
        theta = np.asarray(theta, dtype=np.float64)
        self.w1 = theta[: h * d].reshape(h, d).copy()
        self.b1 = theta[h * d : h * d + h].copy()
        self.w2 = theta[h * d + h : h * d + 2 * h].copy()
        self.b2 = float(theta[-1])

    def forward(self, x, keep=False):
        a = np.tanh(x @ self.w1.T + self.b1)
        out = a @ self.w2 + self.b2
        if keep:
            return out, (x, a)
        return out

    def backward(self, dout, cache):
        """Flat parameter gradient given ``dL/d(output)`` per sample."""
        x, a = cache
        g_w2 = a.T @ dout
        g_b2 = float(dout.sum())
        dz = np.outer(dout, self.w2) * (1.0 - a * a)
        g_w1 = dz.T @ x
        g_b1 = dz.sum(axis=0)
        return np.concatenate([g_w1.ravel(), g_b1, g_w2, [g_b2]])


@dataclass
class TrainConfig:
    loss_mode: str = "mse_plus_mono_bank"
    lambda_mono: float = 1.0
    steepness: float = 10.0
    batch_size: int = 8
    epochs: int = 30
    learning_rate: float = 0.05
    seed: int = 0
    retention_epochs: int = 1
    hidden: int = 16

    def __post_init__(self):
        if self.loss_mode not in LOSS_MODES:
            raise InvalidConfig(f"loss_mode must be one of {LOSS_MODES}", "loss_mode")
        if not (self.lambda_mono >= 0 and math.isfinite(self.lambda_mono)):
            raise InvalidConfig("lambda_mono must be a finite non-negative number", "lambda_mono")
        if self.batch_size < 1 or (self.loss_mode != "mse_only" and self.batch_size < 2):
            raise InvalidConfig("batch_size must be >= 2 when the monotonicity loss is on", "batch_size")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1", "epochs")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise InvalidConfig("learning_rate must be positive", "learning_rate")
        if self.retention_epochs < 1:
            raise InvalidConfig("retention_epochs must be >= 1", "retention_epochs")
        if self.hidden < 1:
            raise InvalidConfig("hidden must be >= 1", "hidden")
        SoftRankConfig(self.steepness)

    def to_dict(self):
        return asdict(self)


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    test_plcc: float
    test_srocc: float


def _safe_corr(fn, a, b):
    try:
        return fn(a, b)
    except ValueError:
        return 0.0


def batch_objective(predictor, x, mos, ids, config, bank=None):
    """Composite objective and flat parameter gradient on one mini-batch.

    ``bank`` (read only here) supplies remembered samples as constants when
    the loss mode uses it. Returns ``(value, grad, preds)``.
    """
    preds, cache = predictor.forward(x, keep=True)
    resid = preds - mos
    value = float(resid @ resid) / preds.shape[0]
    dpred = 2.0 * resid / preds.shape[0]
    if config.loss_mode != "mse_only":
        cfg = SoftRankConfig(config.steepness)
        if config.loss_mode == "mse_plus_mono_bank" and bank is not None:
            tagged, labels = bank.assemble(ids, preds, mos)
        else:
            tagged, labels = GradTaggedScores(preds), mos
        res = mono_loss(tagged, labels, cfg)
        value = value + config.lambda_mono * res.loss
        dpred = dpred + config.lambda_mono * res.grad[: preds.shape[0]]
    return value, predictor.backward(dpred, cache), preds


def evaluate(predictor, dataset):
    pred = predictor.forward(dataset.features)
    return _safe_corr(plcc, dataset.mos, pred), _safe_corr(srocc, dataset.mos, pred)


def train(train_set, test_set, config, bank_trace=None):
    """Plain SGD with a fixed learning rate; returns ``(history, predictor)``.

    Shuffling draws from its own seeded stream, independent of the loss mode,
    so runs that differ only in the objective see identical batches. With the
    memory bank, predictions are recorded after every batch and stale entries
    evicted at each epoch end. ``bank_trace``, if given, receives the bank's
    id set after each eviction.
    """
    rng = np.random.default_rng([config.seed, 1])
    predictor = Predictor(train_set.features.shape[1], config.hidden, seed=config.seed)
    use_bank = config.loss_mode == "mse_plus_mono_bank"
    bank = MemoryBank(config.retention_epochs) if use_bank else None
    n = len(train_set)
    n_batches = max(1, math.ceil(n / config.batch_size))
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for idx in np.array_split(order, n_batches):
            ids = [train_set.ids[i] for i in idx]
            mos = train_set.mos[idx]
            with np.errstate(over="ignore", invalid="ignore"):
                value, grad, preds = batch_objective(predictor, train_set.features[idx], mos, ids, config, bank)
            if not (math.isfinite(value) and np.all(np.isfinite(grad))):
                raise DivergenceDetected(f"non-finite objective at epoch {epoch}")
            predictor.set_params(predictor.get_params() - config.learning_rate * grad)
            if use_bank:
                bank.update(ids, preds, mos, epoch)
            total += value
        if use_bank:
            bank.evict(epoch)
            if bank_trace is not None:
                bank_trace.append(set(bank.predicted))
        train_loss = total / n_batches
        if not math.isfinite(train_loss):
            raise DivergenceDetected(f"non-finite training loss at epoch {epoch}")
        test_plcc, test_srocc = evaluate(predictor, test_set)
        history.append(EpochMetrics(epoch, train_loss, test_plcc, test_srocc))
    return history, predictor

"""Three-way loss-mode ablation over paired seeds.

Config files are flat ``key = value`` text; ``#`` starts a comment. Keys:

=================  ==========================================  =========
key                meaning                                     default
=================  ==========================================  =========
n                  samples per synthetic dataset               300
d                  feature dimension                           8
noise_sigma        label noise scale                           0.15
heteroscedastic    noise grows with quality (true/false)       true
folds              k-fold count                                5
fold_index         which fold is the test set                  0
first_seed         first seed of the sweep                     0
n_seeds            number of paired seeds                      10
modes              comma list of loss modes                    all three
lambda_mono        weight of the monotonicity loss             10.0
steepness          soft-rank steepness k                       10.0
batch_size         mini-batch size                             64
epochs             training epochs                             30
learning_rate      SGD step size                               0.05
retention_epochs   memory-bank retention N                     1
hidden             hidden units of the predictor               16
=================  ==========================================  =========

The defaults describe a short fixed training budget (120 SGD steps) in which
the MSE-only baseline is still well short of the noise ceiling; that is where
the rank terms have room to act. The monotonicity weight is large because
MSE on [0, 1] scores is of order 1e-2 while the loss term is of order 1.

Seed ``s`` generates the dataset, the fold split, the predictor init and the
batch order, so the three modes for one seed see identical data and batches.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import math

import numpy as np

from .errors import DivergenceDetected, InvalidConfig, ParseError
from .harness import LOSS_MODES, TrainConfig, gen_synthetic, split_kfold, train


@dataclass
class AblationConfig:
    n: int = 300
    d: int = 8
    noise_sigma: float = 0.15
    heteroscedastic: bool = True
    folds: int = 5
    fold_index: int = 0
    first_seed: int = 0
    n_seeds: int = 10
    modes: tuple = LOSS_MODES
    lambda_mono: float = 10.0
    steepness: float = 10.0
    batch_size: int = 64
    epochs: int = 30
    learning_rate: float = 0.05
    retention_epochs: int = 1
    hidden: int = 16

    def __post_init__(self):
        for m in self.modes:
            if m not in LOSS_MODES:
                raise InvalidConfig(f"unknown loss mode {m!r}", "modes")
        if self.n_seeds < 1:
            raise InvalidConfig("n_seeds must be >= 1", "n_seeds")
        if self.folds < 2 or not 0 <= self.fold_index < self.folds:
            raise InvalidConfig("need folds >= 2 and 0 <= fold_index < folds", "folds")
        if self.n < 10:
            raise InvalidConfig("n must be >= 10", "n")
        for mode in self.modes:
            self.train_config(mode, self.first_seed)

    @property
    def seeds(self):
        return list(range(self.first_seed, self.first_seed + self.n_seeds))

    def train_config(self, mode, seed):
        return TrainConfig(
            loss_mode=mode,
            lambda_mono=self.lambda_mono,
            steepness=self.steepness,
            batch_size=self.batch_size,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            seed=seed,
            retention_epochs=self.retention_epochs,
            hidden=self.hidden,
        )

    def to_dict(self):
        out = asdict(self)
        out["modes"] = list(self.modes)
        return out


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _coerce(name, typ, raw):
    try:
        if typ is bool:
            return _BOOL[raw.strip().lower()]
        if typ is tuple:
            return tuple(m.strip() for m in raw.split(",") if m.strip())
        return typ(raw)
    except (KeyError, ValueError):
        raise InvalidConfig(f"bad value {raw!r} for {name}", name) from None


def _field_types():
    return {f.name: f.type if isinstance(f.type, type) else eval(f.type) for f in fields(AblationConfig)}


def parse_config(text, overrides=None):
    """Parse ``key = value`` text into an :class:`AblationConfig`; ``overrides`` win."""
    types = _field_types()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected key = value", line=lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise InvalidConfig(f"unknown key {key!r} (line {lineno})", key)
        values[key] = _coerce(key, types[key], val)
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in types:
            raise InvalidConfig(f"unknown key {key!r}", key)
        values[key] = val
    return AblationConfig(**values)


def load_config(path, overrides=None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


@dataclass
class RunResult:
    mode: str
    seed: int
    test_plcc: float = math.nan
    test_srocc: float = math.nan
    train_loss: float = math.nan
    status: str = "ok"
    history: list = field(default_factory=list, repr=False)


def run_one(cfg, mode, seed):
    data = gen_synthetic(seed, cfg.n, cfg.d, cfg.noise_sigma, cfg.heteroscedastic)
    tr, te = split_kfold(data, cfg.folds, cfg.fold_index, seed)
    try:
        history, _ = train(tr, te, cfg.train_config(mode, seed))
    except DivergenceDetected as exc:
        return RunResult(mode, seed, status=f"diverged: {exc}")
    last = history[-1]
    return RunResult(mode, seed, last.test_plcc, last.test_srocc, last.train_loss, "ok", history)


def run_ablation(cfg, jobs=1):
    """Train every (mode, seed) pair; results sorted by (mode order, seed)."""
    tasks = [(m, s) for m in cfg.modes for s in cfg.seeds]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda t: run_one(cfg, *t), tasks))
    else:
        results = [run_one(cfg, m, s) for m, s in tasks]
    rank = {m: i for i, m in enumerate(LOSS_MODES)}
    return sorted(results, key=lambda r: (rank[r.mode], r.seed))


def summarize(results):
    """Mean and sample std of final test PLCC/SROCC per mode (diverged runs excluded)."""
    out = []
    for mode in LOSS_MODES:
        ok = [r for r in results if r.mode == mode and r.status == "ok"]
        if not any(r.mode == mode for r in results):
            continue
        plccs = np.array([r.test_plcc for r in ok])
        sroccs = np.array([r.test_srocc for r in ok])
        ddof = 1 if len(ok) > 1 else 0
        out.append({
            "mode": mode,
            "runs": len(ok),
            "plcc_mean": float(plccs.mean()) if ok else math.nan,
            "plcc_std": float(plccs.std(ddof=ddof)) if ok else math.nan,
            "srocc_mean": float(sroccs.mean()) if ok else math.nan,
            "srocc_std": float(sroccs.std(ddof=ddof)) if ok else math.nan,
        })
    return out


def paired_test(results, better="mse_plus_mono_bank", worse="mse_only"):
    """One-sided paired t-test that ``better`` has higher final test SROCC than ``worse``."""
    from scipy import stats

    a = {r.seed: r.test_srocc for r in results if r.mode == better and r.status == "ok"}
    b = {r.seed: r.test_srocc for r in results if r.mode == worse and r.status == "ok"}
    seeds = sorted(set(a) & set(b))
    if len(seeds) < 2:
        return {"better": better, "worse": worse, "pairs": len(seeds), "mean_diff": math.nan, "p_value": math.nan}
    diff = np.array([a[s] - b[s] for s in seeds])
    if np.all(diff == diff[0]):
        p = 0.0 if diff[0] > 0 else 1.0
    else:
        p = float(stats.ttest_rel([a[s] for s in seeds], [b[s] for s in seeds], alternative="greater").pvalue)
    return {"better": better, "worse": worse, "pairs": len(seeds), "mean_diff": float(diff.mean()), "p_value": p}


def results_csv(results, summary):
    lines = ["mode,seed,test_plcc,test_srocc,train_loss,status"]
    for r in results:
        lines.append(f"{r.mode},{r.seed},{r.test_plcc:.17g},{r.test_srocc:.17g},{r.train_loss:.17g},{r.status}")
    lines.append("mode,runs,plcc_mean,plcc_std,srocc_mean,srocc_std")
    for s in summary:
        lines.append(
            f"{s['mode']},{s['runs']},{s['plcc_mean']:.6f},{s['plcc_std']:.6f},{s['srocc_mean']:.6f},{s['srocc_std']:.6f}"
        )
    return "\n".join(lines) + "\n"


def epoch_csv(history):
    lines = ["epoch,train_loss,test_plcc,test_srocc"]
    for e in history:
        lines.append(f"{e.epoch},{e.train_loss:.17g},{e.test_plcc:.17g},{e.test_srocc:.17g}")
    return "\n".join(lines) + "\n"

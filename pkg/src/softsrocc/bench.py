"""Wall-clock scaling of the monotonicity loss against the pairwise margin loss."""

from dataclasses import asdict, dataclass, field
import time

import numpy as np

from . import kernels
from .baselines import margin_loss_cost, margin_rank_loss
from .errors import InvalidConfig
from .soft_rank import SoftRankConfig, mono_loss, mono_loss_cost

# stated asymptotic orders being compared against the measurement
CLAIMED_EXPONENTS = {"mono_loss": 1.0, "margin_rank_loss": 2.0}
CLAIM_NOTE = (
    "Claimed: the monotonicity loss is O(K) and the pairwise margin loss is O(K^2) in the "
    "sample count K. Each soft rank sums a tanh over every other sample, so the full rank "
    "vector costs K^2 pair evaluations; compare the measured slopes below."
)


@dataclass
class BenchRecord:
    n: int
    wall_ns_mono: int
    wall_ns_margin: int
    pair_count_mono: int
    pair_count_margin: int


@dataclass
class BenchReport:
    records: list = field(default_factory=list)
    slope_mono: float = float("nan")
    slope_margin: float = float("nan")
    reps: int = 5
    backend: str = ""
    note: str = CLAIM_NOTE

    def to_dict(self):
        return {
            "backend": self.backend,
            "reps": self.reps,
            "records": [asdict(r) for r in self.records],
            "slope_mono": self.slope_mono,
            "slope_margin": self.slope_margin,
            "claimed_exponents": dict(CLAIMED_EXPONENTS),
            "note": self.note,
        }

    def to_csv(self):
        lines = ["n,wall_ns_mono,wall_ns_margin,pair_count_mono,pair_count_margin"]
        for r in self.records:
            lines.append(f"{r.n},{r.wall_ns_mono},{r.wall_ns_margin},{r.pair_count_mono},{r.pair_count_margin}")
        return "\n".join(lines) + "\n"


def median_ns(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        times.append(time.perf_counter_ns() - t0)
    return int(np.median(times))


def loglog_slope(sizes, times):
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def check_sizes(sizes):
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2:
        raise InvalidConfig("need at least 2 sizes to fit a slope", "sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 2:
        raise InvalidConfig("sizes must be strictly increasing and >= 2", "sizes")
    return sizes


def run_bench(sizes=(1024, 2048, 4096, 8192), reps=5, k=10.0, seed=0):
    """Median-of-``reps`` timings of both losses (value and gradient) per size."""
    sizes = check_sizes(sizes)
    if reps < 1:
        raise InvalidConfig("reps must be >= 1", "reps")
    cfg = SoftRankConfig(k)
    rng = np.random.default_rng(seed)
    # compile / warm caches outside the timed region
    warm = rng.uniform(size=8)
    mono_loss(warm, warm[::-1], cfg)
    margin_rank_loss(warm, warm[::-1])
    report = BenchReport(reps=reps, backend=kernels.active_backend())
    for n in sizes:
        q = rng.uniform(size=n)
        qhat = rng.uniform(size=n)
        t_mono = median_ns(lambda: mono_loss(qhat, q, cfg), reps)
        t_margin = median_ns(lambda: margin_rank_loss(qhat, q), reps)
        report.records.append(BenchRecord(n, t_mono, t_margin, mono_loss_cost(n), margin_loss_cost(n)))
    report.slope_mono = loglog_slope(sizes, [r.wall_ns_mono for r in report.records])
    report.slope_margin = loglog_slope(sizes, [r.wall_ns_margin for r in report.records])
    return report


def compare_backends(sizes=(256, 512, 1024, 2048), reps=5, k=10.0, seed=0):
    """Per-backend median timings of the soft-rank, VJP and margin kernels."""
    rng = np.random.default_rng(seed)
    rows = []
    for name in kernels.available_backends():
        with kernels.use_backend(name):
            warm = rng.uniform(size=8)
            kernels.soft_rank(warm, k)
            kernels.soft_rank_vjp(warm, k, warm)
            kernels.margin_pairs(warm, warm)
            for n in sizes:
                x = rng.uniform(size=n)
                g = rng.normal(size=n)
                rows.append({
                    "backend": name,
                    "n": n,
                    "soft_rank_ns": median_ns(lambda: kernels.soft_rank(x, k), reps),
                    "soft_rank_vjp_ns": median_ns(lambda: kernels.soft_rank_vjp(x, k, g), reps),
                    "margin_ns": median_ns(lambda: kernels.margin_pairs(x, g), reps),
                })
    return rows

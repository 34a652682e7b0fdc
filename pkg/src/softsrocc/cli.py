"""``softsrocc`` command-line tool.

Exit codes: 0 success, 2 usage error, 3 parse error, 4 degenerate variance,
5 invalid config, 6 gradcheck failure.
"""

import argparse
import json
import logging
import math
import os
import sys
import time

from . import __version__, kernels
from .errors import DegenerateVariance, InvalidConfig, ParseError

log = logging.getLogger("softsrocc")

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_DEGENERATE = 4
EXIT_CONFIG = 5
EXIT_GRADCHECK = 6

_ERROR_CODES = (
    (ParseError, EXIT_PARSE),
    (DegenerateVariance, EXIT_DEGENERATE),
    (InvalidConfig, EXIT_CONFIG),
)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _summary(command, config, results, started):
    return _jsonable({
        "command": command,
        "config": config,
        "results": results,
        "wall_seconds": time.perf_counter() - started,
        "version": __version__,
    })


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("line", "field"):
        if getattr(exc, attr, None) is not None:
            payload[attr] = getattr(exc, attr)
    print(json.dumps(payload), file=sys.stderr)


def cmd_corr(args):
    from .scorefile import read_scores
    from .correlation import plcc, srocc
    from .soft_rank import SoftRankConfig, mono_loss

    started = time.perf_counter()
    scores = read_scores(args.path)
    cfg = SoftRankConfig(args.k)
    res = mono_loss(scores.pred, scores.mos, cfg)
    if res.degenerate:
        raise DegenerateVariance("soft ranks are constant; soft SROCC undefined")
    result = {
        "plcc": plcc(scores.mos, scores.pred),
        "srocc": srocc(scores.mos, scores.pred),
        "soft_srocc": -res.loss,
        "n": len(scores),
        "k": args.k,
    }
    if args.format == "csv":
        text = "plcc,srocc,soft_srocc,n,k\n" + ",".join(
            f"{result[c]:.17g}" if isinstance(result[c], float) else str(result[c])
            for c in ("plcc", "srocc", "soft_srocc", "n", "k")
        ) + "\n"
    else:
        text = json.dumps(result) + "\n"
    _emit(text, args.out)
    log.debug("corr finished in %.3fs", time.perf_counter() - started)
    return EXIT_OK


def cmd_gradcheck(args):
    from . import gradcheck

    started = time.perf_counter()
    if args.n < 3:
        raise InvalidConfig("n must be >= 3", "n")
    if args.trials < 0:
        raise InvalidConfig("trials must be >= 0", "trials")
    if args.trials == 0:
        log.warning("trials=0: nothing to check, passing vacuously")
    report = gradcheck.run_soft_rank_suite(args.n, args.k, args.seed, args.trials)
    if args.trials and not args.skip_train:
        gradcheck.run_train_suite(args.seed, trials=min(args.trials, 3), report=report)
    worst = report.worst
    results = {
        "passed": report.passed,
        "checks": len(report.records),
        "suites": {
            name: {"checks": len(recs), "max_error": max(r.error for r in recs), "threshold": recs[0].threshold}
            for name, recs in report.by_suite().items()
        },
        "worst": None if worst is None else {
            "suite": worst.suite, "n": worst.n, "k": worst.k, "seed": worst.seed,
            "error": worst.error, "threshold": worst.threshold,
        },
    }
    if args.format == "csv":
        lines = ["suite,checks,max_error,threshold"]
        for name, s in results["suites"].items():
            lines.append(f"{name},{s['checks']},{s['max_error']:.3e},{s['threshold']:.0e}")
        text = "\n".join(lines) + "\n"
    else:
        config = {"n": args.n, "k": args.k, "seed": args.seed, "trials": args.trials}
        text = json.dumps(_summary("gradcheck", config, results, started), indent=2) + "\n"
    _emit(text, args.out)
    status = "PASS" if report.passed else "FAIL"
    detail = "" if worst is None else f" worst {worst.suite} error {worst.error:.3e} (threshold {worst.threshold:.0e})"
    print(f"gradcheck {status}:{detail}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_GRADCHECK


def _parse_sizes(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InvalidConfig(f"bad sizes {text!r}", "sizes") from None


def cmd_bench(args):
    from .bench import run_bench

    started = time.perf_counter()
    sizes = _parse_sizes(args.sizes)
    with kernels.use_backend(args.backend or kernels.active_backend()):
        report = run_bench(sizes, args.reps, args.k, args.seed)
    if args.format == "csv":
        text = report.to_csv()
    else:
        config = {"sizes": sizes, "reps": args.reps, "k": args.k, "seed": args.seed}
        text = json.dumps(_summary("bench", config, report.to_dict(), started), indent=2) + "\n"
    _emit(text, args.out)
    print(report.note, file=sys.stderr)
    print(f"measured log-log slope: mono_loss {report.slope_mono:.2f}, margin_rank_loss {report.slope_margin:.2f}",
          file=sys.stderr)
    return EXIT_OK


def cmd_ablation(args):
    from . import ablation

    started = time.perf_counter()
    overrides = {
        "steepness": args.k,
        "lambda_mono": args.lambda_mono,
        "first_seed": args.seed,
        "folds": args.folds,
        "retention_epochs": args.retention,
        "n_seeds": args.seeds,
    }
    if args.config:
        cfg = ablation.load_config(args.config, overrides)
    else:
        cfg = ablation.parse_config("", overrides)
    results = ablation.run_ablation(cfg, jobs=args.jobs)
    for r in results:
        if r.status != "ok":
            log.warning("%s seed %d: %s", r.mode, r.seed, r.status)
    summary = ablation.summarize(results)
    tests = [ablation.paired_test(results, b, w) for b, w in
             (("mse_plus_mono_bank", "mse_only"), ("mse_plus_mono", "mse_only"), ("mse_plus_mono_bank", "mse_plus_mono"))
             if b in cfg.modes and w in cfg.modes]
    if args.epochs_dir:
        os.makedirs(args.epochs_dir, exist_ok=True)
        for r in results:
            if r.history:
                with open(os.path.join(args.epochs_dir, f"{r.mode}_seed{r.seed}.csv"), "w", encoding="utf-8") as fh:
                    fh.write(ablation.epoch_csv(r.history))
    if args.format == "csv":
        text = ablation.results_csv(results, summary)
    else:
        runs = [{k: v for k, v in vars(r).items() if k != "history"} for r in results]
        payload = {"runs": runs, "summary": summary, "paired_tests": tests}
        text = json.dumps(_summary("ablation", cfg.to_dict(), payload, started), indent=2) + "\n"
    _emit(text, args.out)
    for s in summary:
        print(f"{s['mode']:>20}: SROCC {s['srocc_mean']:.4f} +/- {s['srocc_std']:.4f}  "
              f"PLCC {s['plcc_mean']:.4f} +/- {s['plcc_std']:.4f}  ({s['runs']} runs)", file=sys.stderr)
    for t in tests:
        print(f"{t['better']} - {t['worse']}: mean diff {t['mean_diff']:+.4f}, one-sided p = {t['p_value']:.3g}",
              file=sys.stderr)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="softsrocc", description="Differentiable SROCC loss toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, k_default=10.0):
        p.add_argument("--k", type=float, default=k_default, help="soft-rank steepness")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("corr", help="PLCC, SROCC and soft SROCC of a score file")
    p.add_argument("path", help="CSV with header sample_id,mos,pred")
    common(p)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("gradcheck", help="finite-difference check of the analytic gradients")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--skip-train", action="store_true", help="skip the training-objective audit")
    common(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("bench", help="time mono_loss against margin_rank_loss")
    p.add_argument("--sizes", default="1024,2048,4096,8192")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=kernels.available_backends())
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablation", help="loss-mode ablation on the synthetic task")
    p.add_argument("config", nargs="?", help="key = value config file (see softsrocc.ablation)")
    p.add_argument("--lambda", dest="lambda_mono", type=float)
    p.add_argument("--seed", type=int, help="first seed")
    p.add_argument("--seeds", type=int, help="number of paired seeds")
    p.add_argument("--folds", type=int)
    p.add_argument("--retention", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--epochs-dir", help="write per-run epoch CSVs into this directory")
    common(p, k_default=None)
    p.set_defaults(func=cmd_ablation)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        for cls, code in _ERROR_CODES:
            if isinstance(exc, cls):
                _error(exc)
                return code
        raise


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

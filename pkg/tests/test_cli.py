import json

import numpy as np
import pytest

from softsrocc import cli
from softsrocc.correlation import plcc, srocc
from softsrocc.scorefile import ScoreFile, read_scores, write_scores
from softsrocc.soft_rank import SoftRankConfig, mono_loss

TINY_ABLATION = "n = 60\nepochs = 2\nn_seeds = 2\nbatch_size = 16\nfolds = 3\n"


def score_file(tmp_path, mos, pred, name="scores.csv"):
    path = tmp_path / name
    write_scores(path, ScoreFile([f"a{i}" for i in range(len(mos))], np.asarray(mos, float), np.asarray(pred, float)))
    return str(path)


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


class TestCorr:
    def test_identity(self, tmp_path, capsys):
        x = [0.1, 0.5, 0.3, 0.9, 0.7]
        code, res, _ = run_json(capsys, ["corr", score_file(tmp_path, x, x)])
        assert code == 0
        assert res["plcc"] == pytest.approx(1.0, abs=1e-12) and res["srocc"] == pytest.approx(1.0, abs=1e-12)
        assert res["n"] == 5 and res["k"] == 10.0

    def test_negation(self, tmp_path, capsys):
        x = np.array([0.1, 0.5, 0.3, 0.9, 0.7])
        _, res, _ = run_json(capsys, ["corr", score_file(tmp_path, x, -x)])
        assert res["plcc"] == pytest.approx(-1.0, abs=1e-12) and res["srocc"] == pytest.approx(-1.0, abs=1e-12)
        assert res["soft_srocc"] < 0

    def test_one_swap(self, tmp_path, capsys):
        # one adjacent swap in five: 1 - 6*2/120
        _, res, _ = run_json(capsys, ["corr", score_file(tmp_path, [1, 2, 3, 4, 5], [1, 2, 3, 5, 4])])
        assert res["srocc"] == pytest.approx(0.9, abs=1e-12)

    def test_matches_library(self, tmp_path, capsys, rng):
        mos, pred = rng.normal(size=30), rng.normal(size=30)
        path = score_file(tmp_path, mos, pred)
        _, res, _ = run_json(capsys, ["corr", path, "--k", "25"])
        s = read_scores(path)
        assert res["plcc"] == plcc(s.mos, s.pred)
        assert res["srocc"] == srocc(s.mos, s.pred)
        assert res["soft_srocc"] == -mono_loss(s.pred, s.mos, SoftRankConfig(25.0)).loss

    def test_csv_full_precision(self, tmp_path, capsys, rng):
        mos, pred = rng.normal(size=12), rng.normal(size=12)
        path = score_file(tmp_path, mos, pred)
        cli.main(["corr", path, "--format", "csv"])
        header, row = capsys.readouterr().out.strip().split("\n")
        assert header == "plcc,srocc,soft_srocc,n,k"
        vals = dict(zip(header.split(","), row.split(",")))
        s = read_scores(path)
        assert float(vals["plcc"]) == plcc(s.mos, s.pred)
        assert float(vals["srocc"]) == srocc(s.mos, s.pred)

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert cli.main(["corr", score_file(tmp_path, [1, 2, 3], [3, 1, 2]), "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text())["n"] == 3

    def test_parse_error_exit(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("sample_id,mos,pred\na,1,2\nb,oops,3\n")
        assert cli.main(["corr", str(path)]) == cli.EXIT_PARSE
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ParseError" and err["line"] == 3

    def test_constant_column_exit(self, tmp_path, capsys):
        assert cli.main(["corr", score_file(tmp_path, [1, 2, 3], [5, 5, 5])]) == cli.EXIT_DEGENERATE
        assert json.loads(capsys.readouterr().err)["error"] == "DegenerateVariance"

    def test_bad_k_exit(self, tmp_path, capsys):
        assert cli.main(["corr", score_file(tmp_path, [1, 2, 3], [1, 3, 2]), "--k", "-1"]) == cli.EXIT_CONFIG


class TestScoreFile:
    def test_roundtrip_bitwise(self, tmp_path, rng):
        mos, pred = rng.normal(size=20) * 1e3, rng.normal(size=20) * 1e-7
        s = read_scores(score_file(tmp_path, mos, pred))
        assert s.mos.tobytes() == mos.tobytes() and s.pred.tobytes() == pred.tobytes()

    @pytest.mark.parametrize(
        "text, line",
        [
            ("id,mos,pred\na,1,2\nb,2,3\n", 1),
            ("sample_id,mos,pred\na,1,2\na,2,3\n", 3),
            ("sample_id,mos,pred\na,1,2\nb,2\n", 3),
            ("sample_id,mos,pred\na,1,2\nb,2,nan\n", 3),
            ("sample_id,mos,pred\na,1,2\n\nb,2,3\n", 3),
            ("sample_id,mos,pred\na,1,2\n", 2),
        ],
    )
    def test_errors_carry_line(self, text, line):
        from softsrocc.errors import ParseError
        from softsrocc.scorefile import parse_scores

        with pytest.raises(ParseError) as info:
            parse_scores(text)
        assert info.value.line == line

    def test_crlf_accepted(self):
        from softsrocc.scorefile import parse_scores

        s = parse_scores("sample_id,mos,pred\r\na,1,2\r\nb,3,4\r\n")
        assert s.ids == ["a", "b"] and list(s.pred) == [2.0, 4.0]


class TestGradcheck:
    def test_defaults_pass(self, capsys):
        code, res, err = run_json(capsys, ["gradcheck", "--trials", "10"])
        assert code == 0 and res["results"]["passed"]
        assert set(res["results"]["suites"]) == {"jacobian", "mono_loss", "train_objective"}
        assert "PASS" in err

    def test_steep(self, capsys):
        code, res, _ = run_json(capsys, ["gradcheck", "--k", "1000", "--n", "64", "--trials", "2", "--skip-train"])
        assert code == 0
        assert res["results"]["suites"]["mono_loss"]["threshold"] == 1e-4

    def test_zero_trials_vacuous(self, capsys):
        code, res, _ = run_json(capsys, ["gradcheck", "--trials", "0"])
        assert code == 0 and res["results"]["checks"] == 0

    @pytest.mark.parametrize("argv", [["--n", "2"], ["--trials", "-1"], ["--k", "0"]])
    def test_invalid(self, argv, capsys):
        assert cli.main(["gradcheck", *argv]) == cli.EXIT_CONFIG


class TestBench:
    def test_small_run(self, capsys):
        code, res, err = run_json(capsys, ["bench", "--sizes", "32,64,128", "--reps", "1"])
        assert code == 0
        r = res["results"]
        assert [x["n"] for x in r["records"]] == [32, 64, 128]
        assert r["records"][0]["pair_count_margin"] == 32 * 32
        assert "O(K^2)" in err and "slope" in err

    def test_csv(self, capsys):
        cli.main(["bench", "--sizes", "16,32", "--reps", "1", "--format", "csv"])
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0].startswith("n,wall_ns_mono") and len(lines) == 3

    @pytest.mark.parametrize("sizes", ["16", "64,32", "a,b"])
    def test_bad_sizes(self, sizes, capsys):
        assert cli.main(["bench", "--sizes", sizes]) == cli.EXIT_CONFIG

    def test_backends_listed(self):
        from softsrocc.bench import compare_backends

        rows = compare_backends(sizes=(16, 32), reps=1)
        assert {r["n"] for r in rows} == {16, 32}
        assert all(r["soft_rank_ns"] > 0 for r in rows)


class TestAblation:
    def test_tiny_run(self, tmp_path, capsys):
        cfg = tmp_path / "abl.cfg"
        cfg.write_text(TINY_ABLATION)
        epochs = tmp_path / "epochs"
        code, res, err = run_json(capsys, ["ablation", str(cfg), "--epochs-dir", str(epochs)])
        assert code == 0
        runs = res["results"]["runs"]
        assert len(runs) == 6 and all(r["status"] == "ok" for r in runs)
        assert len(res["results"]["paired_tests"]) == 3
        assert len(list(epochs.iterdir())) == 6
        assert "one-sided p" in err

    def test_zero_lambda_rows_equal(self, tmp_path, capsys):
        cfg = tmp_path / "abl.cfg"
        cfg.write_text(TINY_ABLATION + "modes = mse_only, mse_plus_mono\n")
        _, res, _ = run_json(capsys, ["ablation", str(cfg), "--lambda", "0"])
        rows = {(r["mode"], r["seed"]): r for r in res["results"]["runs"]}
        for seed in (0, 1):
            a, b = rows[("mse_only", seed)], rows[("mse_plus_mono", seed)]
            assert (a["test_srocc"], a["test_plcc"], a["train_loss"]) == (b["test_srocc"], b["test_plcc"], b["train_loss"])

    def test_overrides_win(self, tmp_path, capsys):
        cfg = tmp_path / "abl.cfg"
        cfg.write_text(TINY_ABLATION)
        _, res, _ = run_json(capsys, ["ablation", str(cfg), "--seed", "5", "--seeds", "1", "--k", "3"])
        assert res["config"]["first_seed"] == 5 and res["config"]["steepness"] == 3.0
        assert {r["seed"] for r in res["results"]["runs"]} == {5}

    @pytest.mark.parametrize(
        "text, code",
        [
            ("n = 60\nbogus line\n", cli.EXIT_PARSE),
            ("colour = blue\n", cli.EXIT_CONFIG),
            ("epochs = many\n", cli.EXIT_CONFIG),
            ("modes = mse_only, magic\n", cli.EXIT_CONFIG),
            ("batch_size = 1\n", cli.EXIT_CONFIG),
        ],
    )
    def test_config_errors(self, tmp_path, text, code, capsys):
        cfg = tmp_path / "abl.cfg"
        cfg.write_text(text)
        assert cli.main(["ablation", str(cfg)]) == code
        assert "error" in json.loads(capsys.readouterr().err)

    def test_csv_output(self, tmp_path, capsys):
        cfg = tmp_path / "abl.cfg"
        cfg.write_text(TINY_ABLATION + "modes = mse_only\n")
        cli.main(["ablation", str(cfg), "--format", "csv"])
        out = capsys.readouterr().out
        assert out.startswith("mode,seed,test_plcc") and "mode,runs,plcc_mean" in out


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "softsrocc", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.1.0"

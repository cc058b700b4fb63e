import csv
import json
import math
import shutil
import subprocess
import sys

import pytest

from hierclust.cli import main
from hierclust.exact import optimal_profile
from hierclust.hierarchy import MergeHierarchy, approximation_profile, fmt12
from hierclust.metric import load_space

BOUND = 3 + 2 * math.sqrt(2)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# ")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split(" "))
    return meta, list(csv.DictReader(lines[1:]))


@pytest.fixture
def instance(tmp_path, capsys):
    path = tmp_path / "inst.json"
    assert run(capsys, "gen-random", "--n", 8, "--seed", 7, "--out", path)[0] == 0
    return path


class TestGenRandom:
    @pytest.mark.parametrize("family", ["euclidean", "repaired"])
    def test_deterministic(self, tmp_path, capsys, family):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert run(capsys, "gen-random", "--family", family, "--n", 10, "--seed", 7, "--out", p)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        data = json.loads(a.read_text())
        assert data["meta"] == {"family": family, "n": 10, "seed": 7}

    def test_seed_matters(self, capsys):
        _, one, _ = run(capsys, "gen-random", "--n", 5, "--seed", 1)
        _, two, _ = run(capsys, "gen-random", "--n", 5, "--seed", 2)
        assert one != two

    def test_round_trip(self, instance):
        space = load_space(instance)
        assert space.n == 8
        assert load_space(instance) == space


class TestPipeline:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_improved_then_eval(self, tmp_path, capsys, seed):
        inst, hier, out = tmp_path / "i.json", tmp_path / "h.json", tmp_path / "e.csv"
        run(capsys, "gen-random", "--n", 9, "--seed", seed, "--out", inst)
        code, _, _ = run(capsys, "build", "--algo", "improved", "--alpha", 2.4142, "--cost", "diam",
                         "--instance", inst, "--out", hier)
        assert code == 0
        assert run(capsys, "eval", "--instance", inst, "--hierarchy", hier, "--cost", "diam",
                   "--out", out)[0] == 0
        meta, rows = read_csv(out)
        assert len(rows) == 9
        assert max(float(r["ratio"]) for r in rows) <= 5.8285
        assert float(meta["max_ratio"]) <= 5.8285

    def test_eval_matches_recomputation(self, tmp_path, capsys, instance):
        hier, out = tmp_path / "h.json", tmp_path / "e.csv"
        run(capsys, "build", "--algo", "cl", "--cost", "rad", "--instance", instance, "--out", hier)
        run(capsys, "eval", "--instance", instance, "--hierarchy", hier, "--cost", "rad", "--out", out)
        space = load_space(instance)
        h = MergeHierarchy.from_dict(json.loads(hier.read_text()))
        prof = approximation_profile(h, optimal_profile(space, "rad"), space, "rad")
        _, rows = read_csv(out)
        for k, row in enumerate(rows, start=1):
            assert row["ratio"] == fmt12(prof.ratios[k - 1])
            assert row["alg_cost"] == fmt12(prof.alg_costs[k - 1])

    @pytest.mark.parametrize("algo", ["ff", "cl", "mondal", "lin", "improved"])
    def test_every_algorithm_builds(self, tmp_path, capsys, instance, algo):
        hier = tmp_path / "h.json"
        kind = "drad" if algo in ("lin", "mondal") else "diam"
        code, _, err = run(capsys, "build", "--algo", algo, "--cost", kind, "--instance", instance,
                           "--out", hier)
        assert code == 0, err
        h = MergeHierarchy.from_dict(json.loads(hier.read_text()))
        assert h.n == 8

    def test_build_is_deterministic(self, tmp_path, capsys, instance):
        outs = []
        for name in ("a", "b"):
            p = tmp_path / f"{name}.json"
            run(capsys, "build", "--algo", "mondal", "--seed", 3, "--cost", "drad",
                "--instance", instance, "--out", p)
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]

    def test_trace_written(self, tmp_path, capsys, instance):
        trace = tmp_path / "t.json"
        run(capsys, "build", "--algo", "improved", "--cost", "rad", "--instance", instance,
            "--trace", trace, "--out", tmp_path / "h.json")
        data = json.loads(trace.read_text())
        assert all(s["cost"] <= s["bound"] + 1e-9 for s in data["steps"])

    def test_profile_file_reused(self, tmp_path, capsys, instance):
        prof, hier = tmp_path / "p.json", tmp_path / "h.json"
        assert run(capsys, "solve-opt", "--instance", instance, "--cost", "diam", "--out", prof)[0] == 0
        assert run(capsys, "build", "--algo", "lin", "--cost", "diam", "--instance", instance,
                   "--profile", prof, "--out", hier)[0] == 0
        code, out, _ = run(capsys, "eval", "--instance", instance, "--hierarchy", hier,
                           "--cost", "diam", "--profile", prof)
        assert code == 0 and out.startswith("# ")


class TestSolveAndPoh:
    def test_single_level(self, capsys, instance):
        code, out, _ = run(capsys, "solve-opt", "--instance", instance, "--cost", "drad", "--k", 3)
        data = json.loads(out)
        space = load_space(instance)
        prof = optimal_profile(space, "drad")
        assert code == 0 and data["levels"][0]["cost"] == prof.cost(3)
        assert len(data["levels"][0]["blocks"]) == 3

    def test_poh(self, tmp_path, capsys):
        inst = tmp_path / "i.json"
        run(capsys, "gen-random", "--n", 5, "--seed", 4, "--out", inst)
        code, out, _ = run(capsys, "poh", "--instance", inst, "--cost", "diam")
        data = json.loads(out)
        assert code == 0 and data["price_of_hierarchy"] >= 1
        assert MergeHierarchy.from_dict(data["witness"]).n == 5

    def test_poh_limit(self, capsys, instance):
        code, _, err = run(capsys, "poh", "--instance", instance, "--cost", "diam", "--limit", 4)
        assert code == 1 and json.loads(err)["error"] == "InstanceTooLarge"


class TestAnalyzeSeq:
    def test_variant2(self, capsys):
        code, out, _ = run(capsys, "analyze-seq", "--eps", 0.5, "--variant", 2, "--grid", 500)
        data = json.loads(out)
        assert code == 0
        assert data["alpha"] == pytest.approx(BOUND - 0.5, abs=1e-11)
        assert data["discriminant"] < 0
        assert data["grid_points"] == 500

    def test_search(self, capsys):
        _, out, _ = run(capsys, "analyze-seq", "--eps", 0.5, "--variant", 1, "--k", 3)
        assert json.loads(out)["search"] == {"k": 3, "sequence": [0.0, 3.0]}

    def test_bad_eps(self, capsys):
        code, _, err = run(capsys, "analyze-seq", "--eps", 9, "--variant", 1)
        assert code == 1 and json.loads(err)["error"] == "EpsilonOutOfRange"


class TestAdversarial:
    def test_generate_build_certify(self, tmp_path, capsys):
        inst, hier = tmp_path / "adv.json", tmp_path / "h.json"
        assert run(capsys, "gen-adversarial", "--k", 1, "--out", inst)[0] == 0
        side = json.loads((tmp_path / "adv.json.sidecar.json").read_text())
        assert side["N"] == [1, 2]
        run(capsys, "build", "--algo", "cl", "--cost", "diam", "--instance", inst, "--out", hier)
        code, out, _ = run(capsys, "certify", "--instance", inst, "--hierarchy", hier, "--cost", "diam")
        data = json.loads(out)
        assert code == 0
        assert data["certified_ratio"] <= data["measured_ratio"]
        assert data["kernel_mass"] == [2, 2]

    def test_certify_rejects_foreign_instance(self, tmp_path, capsys):
        inst, hier = tmp_path / "r.json", tmp_path / "h.json"
        run(capsys, "gen-random", "--n", 2, "--seed", 0, "--out", inst)
        run(capsys, "build", "--algo", "cl", "--cost", "diam", "--instance", inst, "--out", hier)
        code, _, err = run(capsys, "certify", "--instance", inst, "--hierarchy", hier, "--cost", "diam")
        assert code == 1 and json.loads(err)["error"] == "GroundSetMismatch"

    def test_depth_too_large(self, tmp_path, capsys):
        code, _, err = run(capsys, "gen-adversarial", "--k", 3, "--out", tmp_path / "x.json")
        assert code == 1 and json.loads(err)["error"] == "DepthTooLarge"


class TestErrors:
    def test_parse_error(self, capsys):
        code, _, err = run(capsys, "build", "--algo", "nope")
        rec = json.loads(err)
        assert code == 2 and rec["error"] == "ParseError"

    def test_missing_command(self, capsys):
        assert run(capsys)[0] == 2

    def test_file_not_found(self, tmp_path, capsys):
        code, _, err = run(capsys, "eval", "--instance", tmp_path / "missing.json",
                           "--hierarchy", tmp_path / "h.json", "--cost", "diam")
        rec = json.loads(err)
        assert code == 1 and rec == {"error": "FileNotFound", "message": rec["message"], "command": "eval"}

    def test_bad_metric_file(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"matrix": [[0, 1], [2, 0]]}))
        code, _, err = run(capsys, "solve-opt", "--instance", p, "--cost", "diam")
        assert code == 1 and json.loads(err)["error"] == "AsymmetricMatrix"

    def test_nonpositive_count(self, capsys):
        assert run(capsys, "gen-random", "--n", 0)[0] == 2


@pytest.mark.skipif(shutil.which("hierclust") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["hierclust", "gen-random", "--n", "3", "--seed", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["meta"]["n"] == 3


def test_module_entry():
    res = subprocess.run([sys.executable, "-m", "hierclust", "analyze-seq", "--eps", "1", "--variant", "1",
                          "--grid", "50"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["alpha"] == 3.0

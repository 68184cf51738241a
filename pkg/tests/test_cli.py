import json

import pytest

from treepatterns.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out.strip(), captured.err.strip()


@pytest.fixture
def p2_file(tmp_path):
    path = tmp_path / "p2.json"
    code = main(["tree", "gen", "--kind", "path", "--length", "2", "--out", str(path)])
    assert code == 0
    return str(path)


class TestConst:
    def test_d_constant(self, capsys):
        code, out, _ = run(capsys, "const", "d", "--alpha", "21", "--r", "2")
        assert code == 0 and out == "1/12"

    def test_d_constant_length3(self, capsys):
        code, out, _ = run(capsys, "const", "d", "--alpha", "213", "--r", "3")
        assert code == 0 and out == "-1/3780"

    def test_bernoulli(self, capsys):
        code, out, _ = run(capsys, "const", "bernoulli", "--r", "4")
        assert code == 0 and out == "-1/30"

    def test_table_csv_has_55_rows(self, capsys):
        code, out, _ = run(capsys, "const", "table", "--max-len", "6", "--max-r", "5", "--csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "k,alpha1_class,r,rational,factored"
        assert len(lines) == 56

    def test_a_value(self, capsys):
        code, out, _ = run(capsys, "const", "a", "--k", "3", "--alpha1", "2", "--ell", "2")
        assert code == 0 and out == "1/30"


class TestParam:
    def test_upsilon_p2(self, capsys, p2_file):
        code, out, _ = run(capsys, "param", "upsilon", "--tree", p2_file, "--r", "2", "--k", "2")
        assert code == 0 and out == "5"

    def test_tpl(self, capsys, p2_file):
        code, out, _ = run(capsys, "param", "tpl", "--tree", p2_file)
        assert code == 0 and out == "1"

    def test_ancestor_tail(self, capsys, p2_file):
        code, out, _ = run(capsys, "param", "ancestor-tail", "--tree", p2_file, "--ell", "1")
        assert code == 0 and out == "2"


class TestTree:
    def test_gen_and_show(self, capsys, tmp_path):
        path = tmp_path / "t.json"
        code = main(["tree", "gen", "--kind", "complete", "--height", "3", "--out", str(path)])
        assert code == 0
        code, out, _ = run(capsys, "tree", "show", "--tree", str(path))
        assert code == 0 and "nodes: 15" in out

    def test_split_gen_records_meta(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        code = main([
            "tree", "gen", "--kind", "split-trickle", "--balls", "20", "--seed", "5",
            "--out", str(path),
        ])
        assert code == 0
        doc = json.loads(path.read_text())
        assert doc["meta"]["n"] == 20 and doc["meta"]["seed"] == 5
        code, out, _ = run(capsys, "tree", "show", "--tree", str(path), "--json")
        assert code == 0 and json.loads(out)["balls"] == 20


class TestPattern:
    def test_mean(self, capsys, p2_file):
        code, out, _ = run(capsys, "pattern", "mean", "--tree", p2_file, "--alpha", "21")
        assert code == 0 and out == "1/2"

    def test_dist(self, capsys, p2_file):
        code, out, _ = run(capsys, "pattern", "dist", "--tree", p2_file, "--alpha", "21", "--json")
        assert code == 0
        assert json.loads(out)["pmf"] == {"0": "1/2", "1": "1/2"}

    def test_count_records_seed(self, capsys, p2_file):
        code, out, _ = run(capsys, "pattern", "count", "--tree", p2_file, "--alpha", "21",
                           "--seed", "3", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["seed"] == 3 and doc["count"] in (0, 1)

    def test_count_with_labels_file(self, capsys, p2_file, tmp_path):
        labels = tmp_path / "labels.json"
        labels.write_text("[2, 1]")
        code, out, _ = run(capsys, "pattern", "count", "--tree", p2_file, "--alpha", "21",
                           "--labels", str(labels))
        assert code == 0 and out == "1"

    def test_dist_refuses_big_universe(self, capsys, tmp_path):
        path = tmp_path / "big.json"
        main(["tree", "gen", "--kind", "path", "--length", "11", "--out", str(path)])
        code, _, err = run(capsys, "pattern", "dist", "--tree", str(path), "--alpha", "21")
        assert code == 2 and "cap" in err


class TestEmbed:
    def test_diamond_count(self, capsys, tmp_path):
        path = tmp_path / "p4.json"
        main(["tree", "gen", "--kind", "path", "--length", "4", "--out", str(path)])
        code, out, _ = run(capsys, "embed", "count", "--tree", str(path), "--diamond")
        assert code == 0 and out == "2"

    def test_star_count(self, capsys, tmp_path):
        path = tmp_path / "p3.json"
        main(["tree", "gen", "--kind", "path", "--length", "3", "--out", str(path)])
        code, out, _ = run(capsys, "embed", "count", "--tree", str(path), "--star", "2,2")
        assert code == 0 and out == "2"

    def test_digraph_file(self, capsys, tmp_path):
        gpath = tmp_path / "g.txt"
        gpath.write_text("0 1\n0 2\n1 3\n2 3\n")
        tpath = tmp_path / "p5.json"
        main(["tree", "gen", "--kind", "path", "--length", "5", "--out", str(tpath)])
        code, out, _ = run(capsys, "embed", "count", "--tree", str(tpath), "--digraph", str(gpath))
        assert code == 0 and out == "10"

    def test_enumerate(self, capsys):
        code, out, _ = run(capsys, "embed", "enumerate", "--k", "3", "--r", "2", "--json")
        assert code == 0 and json.loads(out)["count"] == 20


class TestMc:
    def test_cumulants_json_schema(self, capsys, p2_file):
        code, out, _ = run(capsys, "mc", "cumulants", "--tree", p2_file, "--alpha", "21",
                           "--samples", "200", "--seed", "7", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["seed"] == 7 and len(doc["estimates"]) == 4

    def test_ratio_undefined_flag(self, capsys, tmp_path):
        path = tmp_path / "p5.json"
        main(["tree", "gen", "--kind", "path", "--length", "5", "--out", str(path)])
        code, out, _ = run(capsys, "mc", "ratio", "--tree", str(path), "--alpha", "21",
                           "--r", "3", "--samples", "100", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["ratio_undefined"] is True and doc["ratio"] is None
        assert doc["d_constant"] == "0"


class TestVerifyAndErrors:
    def test_verify_table(self, capsys):
        code, out, _ = run(capsys, "verify", "table")
        assert code == 0 and "PASS" in out

    def test_verify_unknown_suite(self, capsys):
        code, _, err = run(capsys, "verify", "nonsense")
        assert code == 1

    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "const", "d", "--alpha", "21", "--r", "2", "--bogus")
        assert code == 1 and "usage error" in err

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "param", "tpl", "--tree", "/nonexistent.json")
        assert code == 1

    def test_invalid_pattern(self, capsys, p2_file):
        code, _, err = run(capsys, "pattern", "mean", "--tree", p2_file, "--alpha", "22")
        assert code == 1 and "permutation" in err

    def test_infeasible_exit_code(self, capsys):
        code, _, err = run(capsys, "tree", "gen", "--kind", "complete", "--height", "40")
        assert code == 2


class TestConfigAndReproducibility:
    def test_config_file_supplies_defaults(self, capsys, tmp_path, p2_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"r": 2, "k": 2}))
        code, out, _ = run(capsys, "param", "upsilon", "--tree", p2_file,
                           "--r", "2", "--k", "2", "--config", str(cfg))
        assert code == 0 and out == "5"
        # config alone supplies what flags omit
        code2, out2, _ = run(capsys, "mc", "cumulants", "--tree", p2_file, "--alpha", "21",
                             "--config", str(tmp_path / "mc.json"))
        # missing config file is a clean error, not a crash
        assert code2 == 1

    def test_reruns_are_byte_identical(self, capsys, p2_file):
        _, out1, _ = run(capsys, "mc", "cumulants", "--tree", p2_file, "--alpha", "21",
                         "--samples", "300", "--seed", "9", "--json")
        _, out2, _ = run(capsys, "mc", "cumulants", "--tree", p2_file, "--alpha", "21",
                         "--samples", "300", "--seed", "9", "--json")
        assert out1 == out2

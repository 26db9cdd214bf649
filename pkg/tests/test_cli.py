import json

import pytest

from sptlab.cli import main
from sptlab.dataset import load_csv
from sptlab.spt import (LeafNode, SplitNode, export_tree, single_leaf_tree,
                        tree_from_json)


def run_cli(*argv):
    return main(list(argv))


def write_toy_files(tmp_path):
    data = tmp_path / "toy.csv"
    data.write_text("segment,price,sold\n0.0,10.0,1\n1.0,12.0,1\n")
    tree = tmp_path / "tree.json"
    tree.write_text(export_tree(single_leaf_tree(10.0, 20.0, 2,
                                                 [10.0, 12.0]), "json"))
    truth = tmp_path / "truth.csv"
    truth.write_text("1.0,0.0\n1.0,1.0\n")  # exact toy demand at prices 10, 12
    return data, tree, truth


def test_synth_writes_csv(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run_cli("synth", "--spec", "1", "--n", "100", "--seed", "7",
                   "--out", str(out)) == 0
    data = load_csv(out)
    assert data.n == 100 and data.d == 2
    assert "n=100" in capsys.readouterr().out


def test_synth_bad_spec_errors(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run_cli("synth", "--spec", "9", "--n", "10", "--out", str(out)) == 1
    assert "error" in capsys.readouterr().err


def test_synth_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run_cli("synth", "--spec", "4", "--n", "60", "--seed", "3",
                       "--out", str(out)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fit_spt_depth3(tmp_path, capsys):
    data = tmp_path / "d.csv"
    assert run_cli("synth", "--spec", "4", "--n", "800", "--seed", "0",
                   "--out", str(data)) == 0
    out = tmp_path / "tree.json"
    assert run_cli("fit", "--data", str(data), "--method", "spt",
                   "--teacher", "gbt:rounds=5,min_child_samples=5",
                   "--depth", "3", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    leaves = [n for n in doc["nodes"] if n["kind"] == "leaf"]
    assert 1 <= len(leaves) <= 8
    assert doc["meta"]["depth"] == 3
    assert "n_leaves" in capsys.readouterr().out


def test_fit_minsplit_rule(tmp_path):
    data = tmp_path / "d.csv"
    assert run_cli("synth", "--spec", "4", "--n", "2000", "--seed", "1",
                   "--out", str(data)) == 0
    out = tmp_path / "tree.json"
    assert run_cli("fit", "--data", str(data), "--method", "spt",
                   "--teacher", "gbt:rounds=5", "--minsplit", "700",
                   "--out", str(out)) == 0
    tree = tree_from_json(out.read_text())

    def subtree_rows(nid):
        node = tree.nodes[nid]
        if isinstance(node, LeafNode):
            return node.n_train
        return subtree_rows(node.left) + subtree_rows(node.right)

    for nid, node in enumerate(tree.nodes):
        if isinstance(node, SplitNode):
            assert subtree_rows(nid) >= 700


def test_fit_ct_writes_one_vs_all(tmp_path):
    data = tmp_path / "d.csv"
    assert run_cli("synth", "--spec", "4", "--n", "600", "--seed", "2",
                   "--out", str(data)) == 0
    out = tmp_path / "policy.json"
    assert run_cli("fit", "--data", str(data), "--method", "ct",
                   "--depth", "2", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert "trees" in doc and "price_grid" in doc
    assert len(doc["trees"]) == len(doc["price_grid"])


def test_fit_oracle_teacher(tmp_path):
    data = tmp_path / "d.csv"
    assert run_cli("synth", "--spec", "1", "--n", "400", "--seed", "5",
                   "--out", str(data)) == 0
    out = tmp_path / "tree.json"
    assert run_cli("fit", "--data", str(data), "--method", "spt",
                   "--teacher", "oracle:1", "--depth", "2",
                   "--out", str(out)) == 0
    assert json.loads(out.read_text())["nodes"]


def test_evaluate_toy_table_truth(tmp_path, capsys):
    data, tree, truth = write_toy_files(tmp_path)
    out = tmp_path / "eval.json"
    assert run_cli("evaluate", "--tree", str(tree), "--data", str(data),
                   "--truth", f"table:{truth}", "--out", str(out)) == 0
    assert capsys.readouterr().out.strip() == "10.000000"
    assert json.loads(out.read_text())["mean_revenue"] == 10.0


def test_evaluate_constant_half_table(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("x0,price,sold\n0.0,4.0,1\n1.0,4.0,0\n")
    tree = tmp_path / "tree.json"
    tree.write_text(export_tree(single_leaf_tree(4.0, 0.0, 2, [4.0]), "json"))
    table = tmp_path / "t.csv"
    table.write_text("0.5\n0.5\n")
    assert run_cli("evaluate", "--tree", str(tree), "--data", str(data),
                   "--truth", f"table:{table}") == 0
    assert capsys.readouterr().out.strip() == "2.000000"


def test_evaluate_missing_tree(tmp_path, capsys):
    data, _, truth = write_toy_files(tmp_path)
    assert run_cli("evaluate", "--tree", str(tmp_path / "nope.json"),
                   "--data", str(data), "--truth", f"table:{truth}") == 1


def test_export_json_round_trip(tmp_path):
    data = tmp_path / "d.csv"
    assert run_cli("synth", "--spec", "3", "--n", "500", "--seed", "4",
                   "--out", str(data)) == 0
    tree = tmp_path / "tree.json"
    assert run_cli("fit", "--data", str(data), "--method", "spt",
                   "--teacher", "gbt:rounds=4", "--depth", "2",
                   "--out", str(tree)) == 0
    again = tmp_path / "again.json"
    assert run_cli("export", "--tree", str(tree), "--format", "json",
                   "--out", str(again)) == 0
    twice = tmp_path / "twice.json"
    assert run_cli("export", "--tree", str(again), "--format", "json",
                   "--out", str(twice)) == 0
    assert json.loads(again.read_text()) == json.loads(twice.read_text())


def test_export_dot_counts(tmp_path):
    # full depth-3 tree: 7 split + 8 leaf nodes
    nodes = []

    def build(level):
        nid = len(nodes)
        if level == 3:
            nodes.append({"id": nid, "kind": "leaf", "price": 1.0,
                          "revenue_sum": 0.0, "n_train": 1})
            return nid
        nodes.append(None)
        left = build(level + 1)
        right = build(level + 1)
        nodes[nid] = {"id": nid, "kind": "split", "feature": 0,
                      "threshold": float(level), "left": left, "right": right}
        return nid

    build(0)
    tree = tmp_path / "tree.json"
    tree.write_text(json.dumps({"feature_names": ["x0"], "price_grid": [1.0],
                                "nodes": nodes, "root": 0}))
    out = tmp_path / "tree.dot"
    assert run_cli("export", "--tree", str(tree), "--format", "dot",
                   "--out", str(out)) == 0
    text = out.read_text()
    assert sum(1 for ln in text.splitlines() if "[shape=" in ln) == 15


def test_export_bad_format_is_usage_error(tmp_path):
    tree = tmp_path / "tree.json"
    tree.write_text(export_tree(single_leaf_tree(1.0), "json"))
    with pytest.raises(SystemExit) as exc:
        run_cli("export", "--tree", str(tree), "--format", "yaml",
                "--out", str(tmp_path / "x"))
    assert exc.value.code != 0


def test_experiment_command(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({
        "name": "micro", "specs": [1], "n_train": 300, "depths": [1],
        "reps": 2, "policies": ["spt", "optimal", "no_change"],
        "teacher": "oracle", "truth": "oracle", "n_test": 300}))
    out_dir = tmp_path / "results"
    assert run_cli("experiment", "--plan", str(plan),
                   "--out-dir", str(out_dir)) == 0
    results = (out_dir / "results.csv").read_text().strip().splitlines()
    assert results[0] == "spec,policy,depth,minsplit,n_train,seed,mean_revenue,n_leaves"
    assert len(results) == 1 + 3 * 2
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "plan_echo.json").exists()

    rerun_dir = tmp_path / "again"
    assert run_cli("experiment", "--plan", str(plan),
                   "--out-dir", str(rerun_dir)) == 0
    assert (out_dir / "results.csv").read_bytes() == \
        (rerun_dir / "results.csv").read_bytes()


def test_experiment_pooled_summary_on_sweeps(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({
        "name": "sweep", "specs": [1], "n_train": 300, "depths": [1, 2],
        "reps": 2, "policies": ["spt"], "teacher": "oracle",
        "truth": "oracle", "n_test": 300}))
    out_dir = tmp_path / "results"
    assert run_cli("experiment", "--plan", str(plan),
                   "--out-dir", str(out_dir)) == 0
    pooled = (out_dir / "summary_pooled.csv").read_text().strip().splitlines()
    assert len(pooled) == 2  # header + one pooled row for (spec1, spt)
    assert pooled[1].startswith("1,spt,None,None,300,")


def test_experiment_bad_plan(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"specs": [1], "bogus_field": 1}))
    assert run_cli("experiment", "--plan", str(plan),
                   "--out-dir", str(tmp_path / "o")) == 1
    assert "error" in capsys.readouterr().err

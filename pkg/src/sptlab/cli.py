"""Command-line entry point: dataset generation, policy fitting, evaluation,
tree export, and full experiment sweeps.

All randomness flows through explicit --seed flags, so every command is
deterministic given its arguments.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import baselines, experiments, synth
from .dataset import (DataError, explicit_grid, load_csv, percentile_grid,
                      write_csv)
from .spt import FitConfig, export_tree, fit_spt, training_revenue, tree_from_json
from .teacher import (GbtConfig, TableTeacher, fit_gbt, load_table_teacher,
                      revenue_matrix, RevenueMatrix)


def _parse_gbt_config(text: str, seed: int) -> GbtConfig:
    kwargs = {"seed": seed}
    if text:
        for item in text.split(","):
            key, _, value = item.partition("=")
            if key == "learning_rate":
                kwargs[key] = float(value)
            elif key in ("rounds", "max_leaves", "min_child_samples", "seed"):
                kwargs[key] = int(value)
            else:
                raise DataError(f"unknown gbt option {key!r}")
    return GbtConfig(**kwargs)


def _make_teacher(source: str, data, grid, seed: int):
    """Parse gbt[:opts] | table:<path> | oracle:<spec_id> into a teacher."""
    kind, _, rest = source.partition(":")
    if kind == "gbt":
        return fit_gbt(data, _parse_gbt_config(rest, seed))
    if kind == "table":
        teacher = load_table_teacher(rest, grid)
        if data is not None and teacher.probs.shape[0] != data.n:
            raise DataError(
                f"table teacher has {teacher.probs.shape[0]} rows, data has {data.n}")
        return teacher
    if kind == "oracle":
        return synth.oracle_teacher(synth.make_spec(int(rest), seed))
    raise DataError(f"unknown teacher source {source!r}")


def _parse_grid(flag: str, data):
    if flag == "percentile":
        return percentile_grid(data.prices)
    if flag.startswith("explicit:"):
        values = [float(v) for v in flag.split(":", 1)[1].split(",")]
        return explicit_grid(values)
    raise DataError(f"unknown grid mode {flag!r}")


def cmd_synth(args) -> int:
    spec = synth.make_spec(args.spec, args.seed)
    data = synth.generate(spec, args.n, args.seed)
    write_csv(data, args.out)
    print(f"wrote {args.out}: n={data.n} d={data.d} "
          f"positive_rate={data.outcomes.mean():.4f} seed={args.seed}")
    return 0


def cmd_fit(args) -> int:
    data = load_csv(args.data)
    grid = _parse_grid(args.grid, data)
    if args.minsplit is not None:
        config = FitConfig(max_depth=None, minsplit=args.minsplit,
                           min_leaf=max(1, args.minsplit // 3))
    else:
        config = FitConfig(max_depth=args.depth, minsplit=2, min_leaf=1)
    flags = {"data": args.data, "method": args.method, "grid": args.grid,
             "depth": args.depth, "minsplit": args.minsplit, "seed": args.seed,
             "teacher": args.teacher}

    def tree_revmat():
        teacher = _make_teacher(args.teacher, data, grid, args.seed)
        if isinstance(teacher, TableTeacher):
            return teacher, RevenueMatrix(teacher.probs * grid.prices[None, :], grid)
        return teacher, revenue_matrix(teacher, data.features, grid)

    if args.method == "spt":
        _, revmat = tree_revmat()
        tree = fit_spt(data.features, revmat, config, data.feature_names)
    elif args.method == "pt":
        assign = baselines.assign_treatments(data.prices, grid)
        tree = baselines.fit_pt(data, grid, assign, config)
    elif args.method == "naive":
        teacher, _ = tree_revmat()
        tree = baselines.fit_naive_distill(teacher, data.features, grid,
                                           config, data.feature_names)
    elif args.method == "const":
        _, revmat = tree_revmat()
        tree = baselines.constant_price_policy(revmat)
    elif args.method == "ct":
        assign = baselines.assign_treatments(data.prices, grid)
        policy = baselines.fit_ct_one_vs_all(data, grid, assign, config, args.seed)
        doc = json.loads(baselines.export_one_vs_all(policy))
        doc["meta"] = flags
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
        print(f"wrote {args.out}: one-vs-all policy, {len(policy.trees)} trees, "
              f"mean_leaves={policy.n_leaves_mean:.1f}")
        return 0
    else:
        raise DataError(f"unknown method {args.method!r}")

    doc = json.loads(export_tree(tree, "json"))
    doc["meta"] = flags
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
    print(f"wrote {args.out}: training_revenue_per_item="
          f"{training_revenue(tree) / data.n:.6f} n_leaves={tree.n_leaves}")
    return 0


def _load_policy(path):
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    doc = json.loads(text)
    if "trees" in doc:
        return baselines.one_vs_all_from_json(text), doc
    return tree_from_json(text), doc


def cmd_evaluate(args) -> int:
    policy, doc = _load_policy(args.tree)
    data = load_csv(args.data)
    kind, _, rest = args.truth.partition(":")
    prices = policy.prescribe(data.features)
    if kind == "oracle":
        spec = synth.make_spec(int(rest), args.seed)
        truth = synth.oracle_teacher(spec)
        probs = truth.predict_proba_batch(data.features, prices)
    elif kind == "table":
        grid = explicit_grid(doc["price_grid"])
        truth = load_table_teacher(rest, grid)
        if truth.probs.shape[0] != data.n:
            raise DataError(
                f"table truth has {truth.probs.shape[0]} rows, data has {data.n}")
        rows = np.arange(data.n, dtype=np.float64)[:, None]
        probs = truth.predict_proba_batch(rows, prices)
    elif kind == "gbt":
        truth = fit_gbt(data, _parse_gbt_config(rest, args.seed))
        probs = truth.predict_proba_batch(data.features, prices)
    else:
        raise DataError(f"unknown truth source {args.truth!r}")
    value = float(np.mean(prices * probs))
    print(f"{value:.6f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump({"mean_revenue": value,
                       "flags": {"tree": args.tree, "data": args.data,
                                 "truth": args.truth, "seed": args.seed}},
                      f, indent=2)
    return 0


def cmd_experiment(args) -> int:
    plan = experiments.load_plan(args.plan)
    os.makedirs(args.out_dir, exist_ok=True)
    rows = experiments.run_experiment(plan)
    results_path = os.path.join(args.out_dir, "results.csv")
    experiments.write_results_csv(rows, results_path)
    with open(os.path.join(args.out_dir, "plan_echo.json"), "w",
              encoding="utf-8") as f:
        json.dump({"name": plan.name, "specs": list(plan.specs),
                   "n_train": list(plan.n_train),
                   "depths": None if plan.depths is None else list(plan.depths),
                   "minsplits": (None if plan.minsplits is None
                                 else list(plan.minsplits)),
                   "reps": plan.reps, "base_seed": plan.base_seed,
                   "policies": list(plan.policies), "teacher": plan.teacher,
                   "truth": plan.truth, "n_test": plan.n_test}, f, indent=2)
    def write_summary(name, reports):
        with open(os.path.join(args.out_dir, name), "w",
                  encoding="utf-8", newline="") as f:
            f.write("spec,policy,depth,minsplit,n_train,mean_revenue,"
                    "max_revenue,min_revenue,std_error,n_reps\n")
            for r in reports:
                f.write(f"{r.spec},{r.policy},{r.depth},{r.minsplit},"
                        f"{r.n_train},{r.mean_revenue!r},{r.max_revenue!r},"
                        f"{r.min_revenue!r},{r.std_error!r},{r.n_reps}\n")

    write_summary("summary.csv", experiments.aggregate(rows))
    knobs = plan.depths if plan.depths is not None else plan.minsplits
    if len(knobs) > 1:
        # best/worst across the complexity sweep as well as across seeds
        write_summary("summary_pooled.csv",
                      experiments.aggregate(rows, pool_depths=True))
    print(f"wrote {results_path} ({len(rows)} rows)")
    return 0


def cmd_export(args) -> int:
    with open(args.tree, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if "trees" in doc:
        raise DataError("export works on single-tree files, not one-vs-all policies")
    tree = tree_from_json(json.dumps(doc))
    text = export_tree(tree, args.format)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(text)
        if not text.endswith("\n"):
            f.write("\n")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sptlab",
        description="Interpretable personalized pricing with prescriptive trees")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--spec", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit a pricing policy and write its JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True,
                   choices=["spt", "pt", "ct", "naive", "const"])
    p.add_argument("--teacher", default="gbt",
                   help="gbt[:k=v,...] | table:<path> | oracle:<spec_id>")
    p.add_argument("--grid", default="percentile",
                   help="percentile | explicit:<p1,p2,...>")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--minsplit", type=int, default=None,
                   help="use minsplit termination with unbounded depth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="expected revenue of a policy file")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--truth", required=True,
                   help="oracle:<spec_id> | table:<path> | gbt[:k=v,...]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a sweep plan")
    p.add_argument("--plan", required=True,
                   help="plan JSON path or bundled plan name (e.g. table1_small)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("export", help="re-serialize a tree as JSON or DOT")
    p.add_argument("--tree", required=True)
    p.add_argument("--format", required=True, choices=["json", "dot"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, experiments.PlanError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

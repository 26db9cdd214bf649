"""Benchmark sweep runner: generates synthetic worlds, fits all requested
policies, scores them counterfactually, and emits machine-readable results."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import baselines, synth
from .dataset import percentile_grid, split_halves
from .evaluation import expected_revenue
from .rng import derive_seed
from .spt import FitConfig, fit_spt
from .teacher import GbtConfig, TeacherGridPolicy, fit_gbt, revenue_matrix

POLICY_NAMES = ("spt", "pt", "ct", "naive", "teacher", "const", "optimal",
                "no_change")
RESULT_COLUMNS = ("spec", "policy", "depth", "minsplit", "n_train", "seed",
                  "mean_revenue", "n_leaves")

# Salts for per-cell derived seeds (documented; see rng module).
_SALT_TEST = 1
_SALT_CT = 2
_SALT_HALVES = 3


class PlanError(ValueError):
    """Invalid experiment plan."""


@dataclass(frozen=True)
class ExperimentPlan:
    """Declarative sweep description; see README for the JSON schema."""

    specs: tuple[int, ...]
    n_train: tuple[int, ...] = (5000,)
    depths: tuple[int, ...] | None = (3,)
    minsplits: tuple[int, ...] | None = None
    reps: int = 10
    base_seed: int = 0
    policies: tuple[str, ...] = ("spt", "pt", "ct", "optimal", "no_change")
    teacher: str = "gbt"
    truth: str = "oracle"
    n_test: int = 5000
    gbt: GbtConfig = GbtConfig()
    name: str = "experiment"

    def __post_init__(self):
        if not self.specs or any(s not in synth.SPEC_IDS for s in self.specs):
            raise PlanError(f"specs must be drawn from {synth.SPEC_IDS}")
        if (self.depths is None) == (self.minsplits is None):
            raise PlanError("exactly one of depths/minsplits must be set")
        if self.reps < 1 or self.n_test < 1 or any(n < 20 for n in self.n_train):
            raise PlanError("reps, n_test and n_train must be sensible positives")
        bad = [p for p in self.policies if p not in POLICY_NAMES]
        if bad:
            raise PlanError(f"unknown policies {bad}; valid: {POLICY_NAMES}")
        if self.teacher not in ("gbt", "oracle"):
            raise PlanError("teacher must be 'gbt' or 'oracle'")
        if self.truth not in ("oracle", "evaluator"):
            raise PlanError("truth must be 'oracle' or 'evaluator'")

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(self.base_seed + i for i in range(self.reps))


def plan_from_dict(doc: dict) -> ExperimentPlan:
    doc = dict(doc)
    known = {"specs", "n_train", "depths", "minsplits", "reps", "base_seed",
             "policies", "teacher", "truth", "n_test", "gbt", "name"}
    unknown = set(doc) - known
    if unknown:
        raise PlanError(f"unknown plan fields {sorted(unknown)}")
    kwargs: dict = {}
    if doc.get("gbt"):
        kwargs["gbt"] = GbtConfig(**doc["gbt"])
    for k in ("specs", "policies"):
        if k in doc:
            kwargs[k] = tuple(doc[k])
    if "n_train" in doc:
        v = doc["n_train"]
        kwargs["n_train"] = tuple(v) if isinstance(v, (list, tuple)) else (int(v),)
    for k in ("depths", "minsplits"):
        if k in doc:
            kwargs[k] = None if doc[k] is None else tuple(doc[k])
    if kwargs.get("minsplits") is not None and "depths" not in doc:
        kwargs["depths"] = None
    for k in ("reps", "base_seed", "teacher", "truth", "n_test", "name"):
        if k in doc:
            kwargs[k] = doc[k]
    return ExperimentPlan(**kwargs)


def load_plan(path_or_name) -> ExperimentPlan:
    """Load a plan JSON from a path, or a bundled plan by bare name."""
    path = str(path_or_name)
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as f:
            return plan_from_dict(json.load(f))
    bundled = resources.files("sptlab").joinpath(f"plans/{path}.json")
    if bundled.is_file():
        return plan_from_dict(json.loads(bundled.read_text(encoding="utf-8")))
    raise PlanError(f"no plan file or bundled plan named {path!r}")


@dataclass(frozen=True)
class EvaluationReport:
    """Aggregate of one (spec, policy, knob) cell across replications."""

    spec: int
    policy: str
    depth: int | None
    minsplit: int | None
    n_train: int
    mean_revenue: float
    max_revenue: float
    min_revenue: float
    std_error: float
    n_reps: int
    config: dict = field(default_factory=dict)


def _fit_config(depth, minsplit) -> FitConfig:
    if minsplit is not None:
        # rpart's minbucket convention: children must hold minsplit/3 rows
        return FitConfig(max_depth=None, minsplit=minsplit,
                         min_leaf=max(1, minsplit // 3))
    return FitConfig(max_depth=depth, minsplit=2, min_leaf=1)


def run_cell(plan: ExperimentPlan, spec_id: int, n: int, seed: int,
             depth=None, minsplit=None) -> list[dict]:
    """One replication: generate, fit every requested policy, score on fresh
    draws; returns one result row per policy."""
    spec = synth.make_spec(spec_id, seed)
    data = synth.generate(spec, n, seed)
    test = synth.generate(spec, plan.n_test, derive_seed(seed, _SALT_TEST))

    if plan.truth == "evaluator":
        eval_half, learn_half = split_halves(data, derive_seed(seed, _SALT_HALVES))
        truth = fit_gbt(eval_half, plan.gbt)
        learn = learn_half
    else:
        truth = synth.oracle_teacher(spec)
        learn = data

    grid = percentile_grid(learn.prices)
    teacher_model = (synth.oracle_teacher(spec) if plan.teacher == "oracle"
                     else fit_gbt(learn, plan.gbt))
    config = _fit_config(depth, minsplit)
    needs_revmat = any(p in plan.policies for p in ("spt", "teacher", "const"))
    revmat = revenue_matrix(teacher_model, learn.features, grid) if needs_revmat else None

    rows = []
    for name in plan.policies:
        n_leaves = 0
        if name == "spt":
            tree = fit_spt(learn.features, revmat, config, learn.feature_names)
            rev = expected_revenue(tree, test.features, truth)
            n_leaves = tree.n_leaves
        elif name == "pt":
            assign = baselines.assign_treatments(learn.prices, grid)
            tree = baselines.fit_pt(learn, grid, assign, config)
            rev = expected_revenue(tree, test.features, truth)
            n_leaves = tree.n_leaves
        elif name == "ct":
            assign = baselines.assign_treatments(learn.prices, grid)
            policy = baselines.fit_ct_one_vs_all(learn, grid, assign, config,
                                                 derive_seed(seed, _SALT_CT))
            rev = expected_revenue(policy, test.features, truth)
            n_leaves = policy.n_leaves_mean
        elif name == "naive":
            tree = baselines.fit_naive_distill(teacher_model, learn.features,
                                               grid, config, learn.feature_names)
            rev = expected_revenue(tree, test.features, truth)
            n_leaves = tree.n_leaves
        elif name == "teacher":
            rev = expected_revenue(TeacherGridPolicy(teacher_model, grid),
                                   test.features, truth)
        elif name == "const":
            tree = baselines.constant_price_policy(revmat)
            rev = expected_revenue(tree, test.features, truth)
            n_leaves = 1
        elif name == "optimal":
            fine = synth.fine_price_grid(float(grid.prices[0]),
                                         float(grid.prices[-1]), 1000)
            rev = expected_revenue(synth.OraclePolicy(spec, fine),
                                   test.features, truth)
        elif name == "no_change":
            rev = baselines.historical_policy_revenue(test, truth)
        else:  # pragma: no cover - guarded by plan validation
            raise PlanError(f"unknown policy {name}")
        rows.append({"spec": spec_id, "policy": name,
                     "depth": -1 if depth is None else depth,
                     "minsplit": config.minsplit, "n_train": n, "seed": seed,
                     "mean_revenue": rev, "n_leaves": round(float(n_leaves), 3)})
    return rows


def _cells(plan: ExperimentPlan):
    knobs = ([("depth", d) for d in plan.depths] if plan.depths is not None
             else [("minsplit", ms) for ms in plan.minsplits])
    for spec_id in plan.specs:
        for n in plan.n_train:
            for kind, value in knobs:
                for seed in plan.seeds:
                    yield (spec_id, n, seed,
                           value if kind == "depth" else None,
                           value if kind == "minsplit" else None)


def run_experiment(plan: ExperimentPlan) -> list[dict]:
    """Run every cell of the plan; rows come back sorted by key so output is
    independent of scheduling. Worker count is capped by SPTLAB_THREADS."""
    cells = list(_cells(plan))
    workers = max(1, int(os.environ.get("SPTLAB_THREADS", "1")))
    if workers == 1:
        nested = [run_cell(plan, *cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(lambda c: run_cell(plan, *c), cells))
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r["spec"], r["policy"], r["depth"], r["minsplit"],
                             r["n_train"], r["seed"]))
    return rows


def aggregate(rows: list[dict], pool_depths: bool = False) -> list[EvaluationReport]:
    """Mean/max/min and standard error across seeds per cell; optionally pool
    across the depth/minsplit knob as well (matching table-style summaries)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        key = (r["spec"], r["policy"], None if pool_depths else r["depth"],
               None if pool_depths else r["minsplit"], r["n_train"])
        groups.setdefault(key, []).append(r)
    reports = []
    for (spec, policy, depth, minsplit, n_train), grp in sorted(
            groups.items(), key=lambda kv: tuple(str(x) for x in kv[0])):
        revs = np.asarray([g["mean_revenue"] for g in grp])
        se = float(revs.std(ddof=1) / np.sqrt(revs.size)) if revs.size > 1 else 0.0
        reports.append(EvaluationReport(
            spec=spec, policy=policy, depth=depth, minsplit=minsplit,
            n_train=n_train, mean_revenue=float(revs.mean()),
            max_revenue=float(revs.max()), min_revenue=float(revs.min()),
            std_error=se, n_reps=int(revs.size),
            config={"pooled": pool_depths}))
    return reports


def write_results_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(RESULT_COLUMNS)
        for r in rows:
            writer.writerow([r["spec"], r["policy"], r["depth"], r["minsplit"],
                             r["n_train"], r["seed"], repr(r["mean_revenue"]),
                             repr(r["n_leaves"])])


def read_results_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        rows = []
        for rec in reader:
            rows.append({"spec": int(rec["spec"]), "policy": rec["policy"],
                         "depth": int(rec["depth"]), "minsplit": int(rec["minsplit"]),
                         "n_train": int(rec["n_train"]), "seed": int(rec["seed"]),
                         "mean_revenue": float(rec["mean_revenue"]),
                         "n_leaves": float(rec["n_leaves"])})
    return rows

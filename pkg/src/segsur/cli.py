"""Pipeline orchestrator: design, simulate, fit, explain, stats.

Machine-readable artifact paths go to stdout; progress and diagnostics to
stderr. Exit codes: 0 success, 1 usage/config error, 2 runtime failure
(partial artifacts are left in place).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import explain as ex
from .config import ConfigError, PipelineConfig
from .data import (
    Dataset,
    anova_f,
    feature_matrix,
    read_runs_csv,
    summarize,
    write_runs_csv,
)
from .doe import (
    Design,
    DesignSpec,
    RunDescriptor,
    expand_repetitions,
    generate_nested_lhs,
    read_design_csv,
    write_design_csv,
)
from .params import FEATURE_BOUNDS, FEATURE_NAMES
from .runner import run_batch
from .seeding import stable_seed
from .surrogates import ModelSpec, fit_roster, evaluate, make_model
from .params import bounds_arrays


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config.global_seed = args.seed
    if args.workers is not None:
        config.workers = args.workers
        if config.workers < 1:
            raise ConfigError("workers must be >= 1")
    if args.out is not None:
        config.output_dir = args.out
    return config


def _outdir(config: PipelineConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_doe(config: PipelineConfig) -> int:
    spec = DesignSpec(
        sizes=config.sizes,
        repetitions=config.repetitions,
        seed=config.global_seed,
        ese_iterations=config.ese_iterations,
    )
    design = generate_nested_lhs(spec)
    path = _outdir(config) / "design.csv"
    write_design_csv(design, path)
    print(
        f"doe: {len(design)} points, maximin {design.initial_maximin:.4f} -> "
        f"{design.maximin:.4f}",
        file=sys.stderr,
    )
    print(path)
    return 0


def _progress(label):
    def cb(done, total):
        step = max(1, total // 20)
        if done % step == 0 or done == total:
            print(f"{label}: {done}/{total}", file=sys.stderr)

    return cb


def cmd_simulate(config: PipelineConfig, design_path=None) -> int:
    out = _outdir(config)
    design_path = Path(design_path) if design_path else out / "design.csv"
    points, tiers = read_design_csv(design_path)
    design = Design(
        points=points,
        tier=tiers,
        unit=np.empty((len(points), 0)),
        initial_maximin=0.0,
        maximin=0.0,
    )
    descriptors = expand_repetitions(design, config.repetitions, config.global_seed)

    runs_path = out / "runs.csv"
    existing_records, existing_errors = [], []
    if runs_path.exists():
        existing_records, existing_errors = read_runs_csv(runs_path)
    done = {(r.design_index, r.repetition) for r in existing_records}
    done |= {(e.design_index, e.repetition) for e in existing_errors}
    todo = [d for d in descriptors if (d.design_index, d.repetition) not in done]
    if done:
        print(
            f"simulate: resuming, {len(done)} of {len(descriptors)} rows present",
            file=sys.stderr,
        )
    records, errors = run_batch(
        todo, config.iteration_cap, config.workers, progress=_progress("simulate")
    )
    write_runs_csv(existing_records + records, existing_errors + errors, runs_path)
    if errors:
        print(f"simulate: {len(errors)} runs failed (marker rows kept)", file=sys.stderr)
    print(runs_path)
    return 0


def _load_dataset(config: PipelineConfig, runs_path=None) -> Dataset:
    path = Path(runs_path) if runs_path else Path(config.output_dir) / "runs.csv"
    records, errors = read_runs_csv(path)
    if errors:
        print(f"note: ignoring {len(errors)} error rows from {path}", file=sys.stderr)
    if not records:
        raise RuntimeError(f"no usable runs in {path}")
    return Dataset(records)


def cmd_fit(config: PipelineConfig, runs_path=None) -> int:
    dataset = _load_dataset(config, runs_path)
    models = fit_roster(dataset, roster=config.models, seed=config.global_seed)
    report = evaluate(models, dataset)
    out = _outdir(config)
    csv_path = out / "evaluation.csv"
    report.to_csv(csv_path)
    table_path = out / "evaluation.md"
    table_path.write_text(report.render_table() + "\n", encoding="utf-8")
    print(report.render_table(), file=sys.stderr)
    print(csv_path)
    print(table_path)
    return 0


def _shap_predictor(model):
    return lambda X: np.asarray(model.predict_mean(X), dtype=float)


def cmd_explain(config: PipelineConfig, runs_path=None, model_kind="RF", target="sparsity") -> int:
    dataset = _load_dataset(config, runs_path)
    train = dataset.train_records
    task = "regression" if target == "sparsity" else "classification"
    hp = {"seed": stable_seed(config.global_seed, 97, 0)} if model_kind in ("GP", "RF") else {}
    spec = ModelSpec(kind=model_kind, task=task, hyperparameters=hp)
    model = make_model(spec, bounds=bounds_arrays())
    X_train = feature_matrix(train)
    if target == "sparsity":
        y = np.array([r.sparsity for r in train])
    else:
        y = np.array([1.0 if r.converged else 0.0 for r in train])
    model.fit(X_train, y)

    out = _outdir(config)
    paths = []

    if model_kind in ("DT", "RF"):
        importance = ex.mdi_importance(model)
        p = out / "importance.csv"
        ex.write_importance_csv(importance, FEATURE_NAMES, p)
        paths.append(p)
    else:
        print(f"explain: MDI importance unavailable for {model_kind}", file=sys.stderr)

    rng = np.random.default_rng(stable_seed(config.global_seed, 98, 1))
    background = X_train
    if background.shape[0] > config.shap_background:
        pick = rng.choice(background.shape[0], config.shap_background, replace=False)
        background = background[np.sort(pick)]

    X_all = feature_matrix(dataset.records)
    if config.shap_rows and X_all.shape[0] > config.shap_rows:
        pick = rng.choice(X_all.shape[0], config.shap_rows, replace=False)
        X_all = X_all[np.sort(pick)]
    predict = _shap_predictor(model)
    print(
        f"explain: SHAP over {X_all.shape[0]} rows, background {background.shape[0]}",
        file=sys.stderr,
    )
    attributions, mean_abs_phi = ex.shap_batch(predict, X_all, background)
    p = out / "shap.csv"
    ex.write_shap_csv(attributions, FEATURE_NAMES, p)
    paths.append(p)
    order = np.argsort(-mean_abs_phi)
    print(
        "explain: mean |phi| ranking: "
        + ", ".join(f"{FEATURE_NAMES[k]}={mean_abs_phi[k]:.4g}" for k in order),
        file=sys.stderr,
    )

    for k, name in enumerate(FEATURE_NAMES):
        lower, upper, integer = FEATURE_BOUNDS[name]
        curve = ex.pdp_ice(
            predict,
            k,
            background,
            grid_size=config.pdp_grid_size,
            feature_bounds=(lower, upper),
            integer=integer,
        )
        p = out / f"pdp_ice_{name}.csv"
        ex.write_pdp_ice_csv(curve, p)
        paths.append(p)

    for p in paths:
        print(p)
    return 0


def cmd_stats(config: PipelineConfig, runs_path=None) -> int:
    dataset = _load_dataset(config, runs_path)
    summary = summarize(dataset)
    X = feature_matrix(dataset.records)
    conv = np.array([1.0 if r.converged else 0.0 for r in dataset.records])
    spars = np.array([r.sparsity for r in dataset.records])
    anova = {}
    for k, name in enumerate(FEATURE_NAMES):
        entry = {}
        for label, y in (("sparsity", spars), ("converged", conv)):
            try:
                f_stat, p_val = anova_f(X[:, k], y)
                entry[label] = {"F": f_stat, "p": p_val}
            except ValueError:
                entry[label] = None
        anova[name] = entry
    summary["anova"] = anova
    path = _outdir(config) / "summary.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    print(path)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="segsur", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("doe", "generate the nested Latin hypercube design"),
        ("simulate", "run the simulation batch for a design"),
        ("fit", "fit the surrogate roster and rank it on the validation split"),
        ("explain", "export MDI/SHAP/PDP-ICE diagnostics for one model"),
        ("stats", "summarize a runs file as JSON"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="pipeline config JSON")
        p.add_argument("--seed", type=int, help="override the global seed")
        p.add_argument("--workers", type=int, help="override the worker count")
        p.add_argument("--out", help="override the output directory")
        if name in ("simulate", "fit", "explain", "stats"):
            p.add_argument("--runs", help="runs.csv path (default <out>/runs.csv)")
        if name == "simulate":
            p.add_argument("--design", help="design.csv path (default <out>/design.csv)")
        if name == "explain":
            p.add_argument(
                "--model", default="RF", help="model kind to explain (default RF)"
            )
            p.add_argument(
                "--target",
                default="sparsity",
                choices=("sparsity", "convergence"),
                help="which output to explain",
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args)
        if args.command == "doe":
            return cmd_doe(config)
        if args.command == "simulate":
            return cmd_simulate(config, design_path=args.design)
        if args.command == "fit":
            return cmd_fit(config, runs_path=args.runs)
        if args.command == "explain":
            return cmd_explain(
                config, runs_path=args.runs, model_kind=args.model, target=args.target
            )
        if args.command == "stats":
            return cmd_stats(config, runs_path=args.runs)
        raise CliUsageError(f"unknown command {args.command}")
    except (CliUsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure, partial artifacts stay on disk
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: dataset validation, descriptive statistics,
per-factor analysis, the benchmark grid, single-project prediction and
synthetic data generation.

Exit codes: 0 success, 1 user or data error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    Dataset,
    DatasetError,
    Project,
    compute_ucp,
    generate_synthetic,
    load_dataset,
    save_dataset,
)
from .ensemble import (
    BaseModelParams,
    KARNER_PDR,
    ensemble_fit,
    sw_productivity,
)
from .evaluation import (
    ALL_MODELS,
    ALL_SCHEMES,
    RunSettings,
    SCHEME_NONE,
    benchmark_all,
)
from .locality import assign, partition_by_factor, partition_by_kmeans
from .plots import svg_bar_chart, svg_histogram, svg_interval_plot
from .preprocess import (
    DEFAULT_Z_THRESHOLD,
    ScalerParams,
    minmax_apply,
    minmax_fit,
    remove_outliers,
    zscore_outliers,
)
from .regressors.base import model_from_dict
from .report import (
    build_locality_grid,
    build_none_grid,
    intervals_to_csv,
    moments_table,
    render_grid,
    spearman_table,
    traces_to_csv,
    weights_to_csv,
)
from .stats import interval_plot_data, level_counts

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2


class CliError(Exception):
    def __init__(self, code: int, message: str | None = None):
        super().__init__(message or "")
        self.code = code
        self.message = message


class _Parser(argparse.ArgumentParser):
    """Argument errors are user errors (exit 1, not argparse's default 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_USER, f"error: {message}")


def _fail(message: str) -> CliError:
    return CliError(EXIT_USER, f"error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ucp-locality",
                     description="Productivity and effort prediction over "
                                 "Use Case Points datasets")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add_common(p, out_required=True):
        p.add_argument("--data", required=True, help="dataset CSV path")
        if out_required:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--format", choices=("csv", "json", "md"),
                       default="csv", help="report format")

    p = sub.add_parser("validate", help="schema and invariant check")
    p.add_argument("--data", required=True)

    p = sub.add_parser("stats", help="descriptive statistics and histogram")
    add_common(p)

    p = sub.add_parser("rq1", help="per-factor interval plots and level charts")
    add_common(p)

    p = sub.add_parser("benchmark", help="full locality/model accuracy grid")
    add_common(p)
    _add_run_options(p)
    p.add_argument("--scheme", default="all",
                   help="e1..e8 | kmeans | none | all")
    p.add_argument("--model", default="all",
                   help="svr | cart | stepwise | ensemble | karner | sw | all")

    p = sub.add_parser("predict", help="predict effort for one project")
    p.add_argument("--data", help="training dataset CSV (fit on the fly)")
    p.add_argument("--model-file", help="serialized model artifact (JSON)")
    p.add_argument("--save-model", help="write the fitted artifact here")
    p.add_argument("--scheme", default="none", help="e1..e8 | kmeans | none")
    p.add_argument("--model", default="ensemble",
                   help="svr | cart | stepwise | ensemble | karner | sw")
    p.add_argument("--uaw", type=float, required=True)
    p.add_argument("--uucw", type=float, required=True)
    p.add_argument("--tcf", type=float, required=True)
    p.add_argument("--ef", type=float, required=True)
    p.add_argument("--env", required=True,
                   help="eight comma-separated factor scores, e.g. 3,3,3,3,3,3,3,3")
    p.add_argument("--keep-outliers", action="store_true",
                   help="skip z-score outlier removal before fitting")
    _add_run_options(p)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV file")

    return parser


def _add_run_options(p) -> None:
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--svr-c", type=float, default=1.0)
    p.add_argument("--svr-eps", type=float, default=0.1)
    p.add_argument("--svr-gamma", type=float, default=None,
                   help="RBF width (default: auto)")
    p.add_argument("--cart-min-split", type=int, default=8)
    p.add_argument("--cart-min-leaf", type=int, default=4)
    p.add_argument("--cart-max-depth", type=int, default=6)
    p.add_argument("--alpha", type=float, default=15.0,
                   help="ensemble sigmoid scaling")
    p.add_argument("--z-threshold", type=float, default=DEFAULT_Z_THRESHOLD)
    p.add_argument("--min-local", type=int, default=5)


def _settings_from_args(args) -> RunSettings:
    if args.svr_c <= 0:
        raise _fail(f"--svr-c must be positive, got {args.svr_c}")
    if args.svr_eps < 0:
        raise _fail(f"--svr-eps must be non-negative, got {args.svr_eps}")
    if args.svr_gamma is not None and args.svr_gamma <= 0:
        raise _fail(f"--svr-gamma must be positive, got {args.svr_gamma}")
    if args.alpha <= 0:
        raise _fail(f"--alpha must be positive, got {args.alpha}")
    if args.z_threshold <= 0:
        raise _fail(f"--z-threshold must be positive, got {args.z_threshold}")
    if args.min_local < 1:
        raise _fail(f"--min-local must be at least 1, got {args.min_local}")
    if args.cart_min_leaf < 1 or args.cart_min_split < 2 or args.cart_max_depth < 0:
        raise _fail("invalid CART limits")
    return RunSettings(
        seed=args.seed,
        min_local=args.min_local,
        ensemble_alpha=args.alpha,
        base_params=BaseModelParams(
            svr_c=args.svr_c,
            svr_epsilon=args.svr_eps,
            svr_gamma=args.svr_gamma,
            cart_min_split=args.cart_min_split,
            cart_min_leaf=args.cart_min_leaf,
            cart_max_depth=args.cart_max_depth,
        ),
    )


def _load(path: str) -> Dataset:
    try:
        return load_dataset(path)
    except FileNotFoundError:
        raise _fail(f"cannot read {path}: no such file") from None
    except DatasetError as exc:
        raise _fail(str(exc)) from None


def cmd_validate(args) -> int:
    dataset = _load(args.data)
    print(f"OK: {len(dataset)} projects, ids unique, all invariants hold")
    return EXIT_OK


def cmd_stats(args) -> int:
    dataset = _load(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = args.format
    (out / f"moments.{ext}").write_text(moments_table(dataset, ext))
    (out / f"spearman.{ext}").write_text(spearman_table(dataset, ext))
    (out / "pdr_histogram.svg").write_text(
        svg_histogram(dataset.column("pdr"), bins=10,
                      title=f"PDR histogram ({dataset.name})", x_label="PDR"))
    print(f"wrote moments.{ext}, spearman.{ext}, pdr_histogram.svg to {out}")
    return EXIT_OK


def cmd_rq1(args) -> int:
    dataset = _load(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(1, 9):
        summaries = interval_plot_data(dataset, i)
        (out / f"interval_e{i}.svg").write_text(
            svg_interval_plot(summaries, title=f"PDR vs E{i} levels"))
        (out / f"intervals_e{i}.csv").write_text(intervals_to_csv(summaries))
        counts = level_counts(dataset, i)
        (out / f"levels_e{i}.svg").write_text(
            svg_bar_chart(counts, title=f"Projects per E{i} level"))
    print(f"wrote 8 interval plots, 8 level charts and 8 CSV tables to {out}")
    return EXIT_OK


def _parse_scheme_selector(value: str) -> list[str] | None:
    if value == "all":
        return None
    if value in ALL_SCHEMES or value == SCHEME_NONE:
        return [value]
    raise _fail(f"unknown scheme {value!r} (use e1..e8, kmeans, none or all)")


def _parse_model_selector(value: str) -> list[str] | None:
    if value == "all":
        return None
    if value in ALL_MODELS:
        return [value]
    raise _fail(f"unknown model {value!r}")


def cmd_benchmark(args) -> int:
    dataset = _load(args.data)
    settings = _settings_from_args(args)
    schemes = _parse_scheme_selector(args.scheme)
    models = _parse_model_selector(args.model)
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)

    report = zscore_outliers(dataset, threshold=args.z_threshold)
    cleaned = remove_outliers(dataset, report)
    (out / "outliers.csv").write_text(
        "id,flagged,max_abs_z\n"
        + "".join(f"{r[0]},{r[1]},{r[2]}\n" for r in report.to_csv_rows()))

    reports = benchmark_all(cleaned, settings, schemes=schemes, models=models)

    ext = args.format
    locality = build_locality_grid(reports)
    none_grid = build_none_grid(reports)
    if locality.cells:
        (out / f"table4.{ext}").write_text(render_grid(locality, ext))
    if none_grid.cells:
        (out / f"table5.{ext}").write_text(render_grid(none_grid, ext))
    for rep in reports:
        stem = f"{rep.scheme}_{rep.model}"
        (out / "traces" / f"{stem}.csv").write_text(traces_to_csv(rep))
        if rep.model == "ensemble":
            (out / "traces" / f"{stem}_weights.csv").write_text(weights_to_csv(rep))

    run_info = {
        "seed": settings.seed,
        "dataset": dataset.name,
        "projects": len(dataset),
        "outliers_removed": list(report.flagged_ids),
        "projects_used": len(cleaned),
        "settings": settings.to_dict(),
        "runs": [[r.scheme, r.model] for r in reports],
    }
    (out / "run.json").write_text(json.dumps(run_info, indent=2, sort_keys=True) + "\n")
    print(f"seed {settings.seed}: removed {len(report.flagged_ids)} outlier(s), "
          f"ran {len(reports)} evaluations, reports in {out}")
    return EXIT_OK


def _parse_env(text: str) -> tuple[int, ...]:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 8:
        raise _fail(f"--env needs exactly 8 scores, got {len(parts)}")
    try:
        env = tuple(int(s) for s in parts)
    except ValueError:
        raise _fail(f"--env scores must be integers: {text!r}") from None
    if any(not 0 <= e <= 5 for e in env):
        raise _fail("--env scores must be within 0..5")
    return env


def _project_from_args(args) -> Project:
    try:
        return Project(id="new", source="industrial", uaw=args.uaw,
                       uucw=args.uucw, tcf=args.tcf, ef=args.ef,
                       env=_parse_env(args.env), effort=1.0)
    except ValueError as exc:
        raise _fail(str(exc)) from None


def _fit_artifact(args, project: Project) -> dict:
    """Fit the requested model on (optionally locality-restricted) training
    data and return the artifact document."""
    dataset = _load(args.data)
    settings = _settings_from_args(args)
    if not args.keep_outliers:
        dataset = remove_outliers(dataset, zscore_outliers(
            dataset, threshold=args.z_threshold))

    label = None
    local = list(dataset)
    if args.scheme != SCHEME_NONE:
        if args.scheme not in ALL_SCHEMES:
            raise _fail(f"unknown scheme {args.scheme!r}")
        if args.scheme == "kmeans":
            partitioning = partition_by_kmeans(dataset, seed=settings.seed)
        else:
            partitioning = partition_by_factor(dataset, int(args.scheme[1:]))
        label = assign(project, partitioning)
        members = partitioning.partitions.get(label)
        if members is not None and len(members) >= settings.min_local:
            local = [dataset.by_id(pid) for pid in members]

    artifact: dict = {"partition_label": label, "local_size": len(local),
                      "model_kind": args.model, "seed": settings.seed}
    if args.model == "karner":
        artifact["model"] = {"kind": "karner", "params": {}, "metadata": {}}
        return artifact
    if args.model == "sw":
        artifact["model"] = {"kind": "sw", "params": {}, "metadata": {}}
        return artifact

    features = np.array([p.size_features() for p in local])
    targets = np.array([p.pdr for p in local])
    scaler = minmax_fit(features)
    X = minmax_apply(scaler, features)
    if args.model == "ensemble":
        fitted = ensemble_fit(X, targets, np.array([p.ucp for p in local]),
                              alpha=settings.ensemble_alpha,
                              params=settings.base_params)
    else:
        try:
            fitted = settings.base_params.fit_one(args.model, X, targets)
        except ValueError as exc:
            raise _fail(str(exc)) from None
    artifact["model"] = fitted.to_dict()
    artifact["scaler"] = scaler.to_dict()
    return artifact


def cmd_predict(args) -> int:
    if (args.data is None) == (args.model_file is None):
        raise _fail("provide exactly one of --data or --model-file")
    project = _project_from_args(args)

    if args.model_file:
        try:
            artifact = json.loads(Path(args.model_file).read_text())
        except FileNotFoundError:
            raise _fail(f"cannot read {args.model_file}: no such file") from None
        except json.JSONDecodeError as exc:
            raise _fail(f"invalid model file: {exc}") from None
    else:
        artifact = _fit_artifact(args, project)
        if args.save_model:
            Path(args.save_model).write_text(
                json.dumps(artifact, indent=2, sort_keys=True) + "\n")

    kind = artifact["model"]["kind"]
    model = model_from_dict(artifact["model"])
    if kind == "karner":
        pdr = KARNER_PDR
    elif kind == "sw":
        pdr = sw_productivity(project.env)
    else:
        scaler = ScalerParams.from_dict(artifact["scaler"])
        x = minmax_apply(scaler, np.array(project.size_features()))
        pdr = float(model.predict(x))

    pdr = max(pdr, 0.01)
    ucp = compute_ucp(args.uaw, args.uucw, args.tcf, args.ef)
    effort = pdr * ucp
    print(f"ucp: {ucp!r}")
    print(f"pdr: {pdr!r}")
    print(f"effort: {effort!r}")
    label = artifact.get("partition_label")
    if label:
        print(f"partition: {label} ({artifact['local_size']} projects)")
    else:
        print("partition: none (full dataset)")
    if kind == "ensemble":
        scaler = ScalerParams.from_dict(artifact["scaler"])
        x = minmax_apply(scaler, np.array(project.size_features()))
        for name in ("svr", "stepwise", "cart"):
            w = model.weights[name]
            base = float(model.models[name].predict(x))
            print(f"weight {name}: w_mae={w.w_mae:.4f} w_mbre={w.w_mbre:.4f} "
                  f"w_mibre={w.w_mibre:.4f} w={w.combined:.4f} pdr={base:.4f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.n < 10:
        raise _fail(f"--n must be at least 10, got {args.n}")
    dataset = generate_synthetic(args.seed, args.n)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out)
    print(f"wrote {len(dataset)} synthetic projects (seed {args.seed}) to {out}")
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "rq1": cmd_rq1,
    "benchmark": cmd_benchmark,
    "predict": cmd_predict,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except (DatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

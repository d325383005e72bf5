"""Command-line interface: experiment runs, property suites, data tools.

Subcommands:
  convergence  passive budget sweep, Pearson correlation -> CSV
  sweetspot    active allocation sweep, exp-weighted correlation -> CSV
  properties   run every property suite, print a line per suite
  gen          emit one synthetic dataset (and optionally its hidden scores)
  solve        fit a dataset CSV with an identity embedding, emit scores CSV

All experiment settings can come from a TOML config file (keys mirror the
config fields) and every field has a matching override flag.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from scora.core import Dataset, Embedding, ScoraModel
from scora.experiments import (
    ExperimentConfig,
    config_from_mapping,
    default_sweetspot_config,
    load_config_file,
    run_convergence,
    run_sweetspot,
    write_results_csv,
    RUN_SOLVER,
)
from scora.properties import run_all_property_suites
from scora.rootlaw import parse_root_law
from scora.solver import SolverConfig, solve_map
from scora.synth import (
    allocate_budget,
    generate_observations,
    sample_comparison_queries_uniform,
    sample_ground_truth,
    sample_rating_queries,
    save_ground_truth_csv,
)


def _parse_sweep(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_arity(text: str):
    text = text.strip()
    return text if text.lower() in ("uniform", "inf") else int(text)


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML config file; flags override its keys")
    parser.add_argument("--seed", type=int, help="base seed (config key base_seed)")
    parser.add_argument("--reps", type=int, help="repetitions per sweep point")
    parser.add_argument("--A", type=int, help="number of entities")
    parser.add_argument("--embedding-scheme", help="identity | onehot:<clusters>")
    parser.add_argument("--k-c", type=_parse_arity, help="comparison arity (int or 'uniform')")
    parser.add_argument("--k-r", type=_parse_arity, help="rating arity (int or 'uniform')")
    parser.add_argument("--inference-f", help="override fitting comparison law token")
    parser.add_argument("--inference-g", help="override fitting rating law token")
    parser.add_argument("--prior", help="gaussian:<variance> | cauchy:<scale>")
    parser.add_argument("--prior-threshold-var", type=float)
    parser.add_argument("--b", type=_parse_sweep, help="budget sweep, comma separated")
    parser.add_argument("--p-c", type=_parse_sweep, help="fraction sweep, comma separated")
    parser.add_argument("--c-c", type=float, help="cost of one comparison")
    parser.add_argument("--c-r", type=float, help="cost of one rating")
    parser.add_argument("--pipeline", choices=["passive", "active:ratings", "active:comparisons"])


_FLAG_TO_FIELD = {
    "seed": "base_seed",
    "reps": "repetitions",
    "A": "A",
    "embedding_scheme": "embedding_scheme",
    "k_c": "k_c",
    "k_r": "k_r",
    "prior": "prior",
    "prior_threshold_var": "prior_threshold_var",
    "b": "b",
    "p_c": "p_c",
    "c_c": "c_c",
    "c_r": "c_r",
    "pipeline": "pipeline",
}


def _build_config(args, defaults: dict) -> ExperimentConfig:
    mapping = dict(defaults)
    if args.config:
        mapping.update(load_config_file(args.config))
    for flag, field_name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            mapping[field_name] = value
    inference_f = getattr(args, "inference_f", None)
    inference_g = getattr(args, "inference_g", None)
    if inference_f or inference_g:
        current = mapping.get("inference_laws")
        pair = list(current) if current else [None, None]
        if inference_f:
            pair[0] = inference_f
        if inference_g:
            pair[1] = inference_g
        if None in pair:
            raise ValueError("both --inference-f and --inference-g are required together")
        mapping["inference_laws"] = tuple(pair)
    return config_from_mapping(mapping)


def _cmd_convergence(args) -> int:
    config = _build_config(args, {})
    rows = run_convergence(config)
    write_results_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_sweetspot(args) -> int:
    defaults = {
        name: getattr(default_sweetspot_config(), name)
        for name in (
            "embedding_scheme", "k_c", "k_r", "prior", "b", "p_c", "c_c", "c_r", "pipeline",
        )
    }
    config = _build_config(args, defaults)
    rows = run_sweetspot(config)
    write_results_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_properties(args) -> int:
    reports = run_all_property_suites(seed=args.seed, scale=args.trials_scale)
    for report in reports:
        print(report.line())
    failed = [report for report in reports if not report.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} property suites passed")
    return 1 if failed else 0


def _cmd_gen(args) -> int:
    config = _build_config(args, {})
    rng = np.random.default_rng(np.random.SeedSequence((config.base_seed, 0, 0, 0)))
    embedding = config.build_embedding(rng)
    truth = sample_ground_truth(config.prior_spec, embedding, rng)
    budget, fraction = config.b[0], config.p_c[0]
    plan = allocate_budget(budget, fraction, config.c_c, config.c_r)
    gen_comparison, gen_rating = config.generation_laws
    dataset = generate_observations(
        sample_rating_queries(plan.n_ratings, config.A, rng),
        sample_comparison_queries_uniform(plan.n_comparisons, config.A, rng),
        truth,
        gen_comparison,
        gen_rating,
        rng,
    )
    dataset.to_csv(args.out)
    print(
        f"wrote {dataset.n_ratings} ratings and {dataset.n_comparisons} comparisons "
        f"to {args.out}"
    )
    if args.truth_out:
        save_ground_truth_csv(truth.scores, args.truth_out)
        print(f"wrote hidden scores to {args.truth_out}")
    return 0


def _cmd_solve(args) -> int:
    dataset = Dataset.from_csv(args.data)
    if args.A is not None:
        n_entities = args.A
    else:
        indices = [0]
        for arr in (dataset.rating_entities, dataset.comparison_first, dataset.comparison_second):
            if len(arr):
                indices.append(int(arr.max()) + 1)
        n_entities = max(indices)
    model = ScoraModel(
        Embedding.identity(n_entities),
        parse_root_law(args.f),
        parse_root_law(args.g),
        args.sigma_beta2,
        args.sigma0_2,
    )
    config = SolverConfig(gradient_tolerance=args.tolerance) if args.tolerance else RUN_SOLVER
    result = solve_map(model, dataset, config)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entity", "score"])
        for entity, score in enumerate(result.scores_star):
            writer.writerow([entity, repr(float(score))])
    print(
        f"wrote scores to {args.out} "
        f"(theta0={result.theta0_star:.6g}, iterations={result.iterations}, "
        f"gradient_norm={result.final_gradient_norm:.3e})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scora",
        description="Score entities from mixed ratings and pairwise comparisons.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    convergence = commands.add_parser(
        "convergence", help="passive budget sweep -> results CSV"
    )
    _add_config_flags(convergence)
    convergence.add_argument("--out", required=True, help="output CSV path")
    convergence.set_defaults(handler=_cmd_convergence)

    sweetspot = commands.add_parser(
        "sweetspot", help="active allocation sweep -> results CSV"
    )
    _add_config_flags(sweetspot)
    sweetspot.add_argument("--out", required=True, help="output CSV path")
    sweetspot.set_defaults(handler=_cmd_sweetspot)

    properties = commands.add_parser(
        "properties", help="run the property suites, one pass/fail line each"
    )
    properties.add_argument("--seed", type=int, default=0)
    properties.add_argument(
        "--trials-scale",
        type=float,
        default=1.0,
        help="shrink trial counts by this factor (smoke runs)",
    )
    properties.set_defaults(handler=_cmd_properties)

    gen = commands.add_parser("gen", help="emit one synthetic dataset CSV")
    _add_config_flags(gen)
    gen.add_argument("--out", required=True, help="dataset CSV path")
    gen.add_argument("--truth-out", help="also write the hidden scores CSV")
    gen.set_defaults(handler=_cmd_gen)

    solve = commands.add_parser("solve", help="fit a dataset CSV, emit scores CSV")
    solve.add_argument("--data", required=True, help="dataset CSV path")
    solve.add_argument("--out", required=True, help="scores CSV path")
    solve.add_argument("--A", type=int, help="entity count (default: max index + 1)")
    solve.add_argument("--f", default="uniform", help="comparison root-law token")
    solve.add_argument("--g", default="uniform", help="rating root-law token")
    solve.add_argument("--sigma-beta2", type=float, default=1.0)
    solve.add_argument("--sigma0-2", dest="sigma0_2", type=float, default=1.0)
    solve.add_argument("--tolerance", type=float, help="gradient tolerance override")
    solve.set_defaults(handler=_cmd_solve)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit code 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())

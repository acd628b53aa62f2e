"""Single command-line entry point orchestrating the experiment recipes.

Subcommands chain into pipelines without manual edits: ``sample`` makes
a pool, ``filter`` and ``inject`` transform it, ``ingest`` loads run
logs, and ``pareto`` / ``crossing`` / ``scaling-law`` / ``extrapolate``
analyze them.  Every artifact-producing command writes a
``<output>.manifest.json`` sidecar; identical command + inputs + seed
give byte-identical outputs (manifests carry the only timestamp).

Exit codes: 0 success, 1 domain error (single "error: ..." line on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .corpus import read_documents, read_pool, sample_pool, write_pool
from .errors import ConfigError, PoolLabError, ValidationError
from .factuality import (
    Verdict,
    aggregate_judgements,
    judge_documents,
    keyword_match,
    mock_judge_client,
    JudgeClient,
    JudgeRun,
    read_qa_items,
    write_judgements,
    VERDICT_COLUMNS,
)
from .filters import build_stages, profile, run_pipeline, PROFILES
from .injection import (
    InjectionSpec,
    JunkKind,
    build_vocab,
    inject,
    random_junk_stream,
    shuffled_junk_stream,
)
from .runlog import (
    EvalSlice,
    best_eval,
    bundled_model_configs,
    compute_flops,
    epochs,
    load_run_log,
    ModelConfig,
    parse_run_log,
    slice_loss,
    write_run_log,
)
from .scaling import (
    CrossingPoint,
    FrontierPoint,
    ThresholdLaw,
    ThresholdPoint,
    crossing_point,
    extrapolate_compute,
    fit_crossing_quadratic,
    fit_threshold_epoch_constraint,
    fit_threshold_tokens_per_param,
    pareto_frontier,
)
from .theory import run_filter_fact_trial, run_rank_necessity_trial

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2

REFERENCE_POOL_TOKENS = 240e12  # full-corpus scale used in summaries


class UsageError(Exception):
    """Flag combination errors that should exit with the usage code."""


# ---------------------------------------------------------------------------
# Small helpers: config merging, manifests, CSV output.
# ---------------------------------------------------------------------------


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return obj


def opt(args: argparse.Namespace, config: dict, key: str, default):
    """Flag value if given, else config-file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _threads(args: argparse.Namespace, config: dict) -> int:
    n = int(opt(args, config, "threads", os.cpu_count() or 1))
    if n < 1:
        raise ConfigError(f"--threads must be >= 1, got {n}")
    return n


def write_manifest(
    output: str | Path,
    args: argparse.Namespace,
    seeds: dict[str, int] | None = None,
    inputs: Sequence[str] = (),
    outputs: Sequence[str] = (),
) -> None:
    merged = {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    digest = hashlib.sha256(
        json.dumps(merged, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()
    manifest = {
        "command_line": " ".join(sys.argv),
        "config_digest": digest,
        "seeds": seeds or {},
        "inputs": sorted(str(p) for p in inputs),
        "outputs": sorted(str(p) for p in outputs),
        "tool_version": __version__,
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(str(output) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _csv_value(value: object) -> str:
    if value is None:
        return "NEVER"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)  # full precision, round-trips exactly
    return str(value)


def write_csv(path: str | Path, fieldnames: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_csv_value(row[name]) for name in fieldnames])


def _write_json(path: str | Path, obj: object) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Subcommand handlers.
# ---------------------------------------------------------------------------


def cmd_sample(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    seed = int(opt(args, config, "seed", 0))
    target = int(float(opt(args, config, "target_tokens", 0)))
    label = opt(args, config, "label", Path(args.output).stem)
    pool = sample_pool(read_documents(args.input), target, seed, label=label)
    write_pool(args.output, pool)
    write_manifest(args.output, args, {"seed": seed}, [args.input], [args.output])
    print(f"sampled {len(pool)} docs, {pool.total_tokens} tokens -> {args.output}")
    return EXIT_OK


def cmd_filter(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    cfg = profile(opt(args, config, "profile", "gopher"))
    cfg.english_threshold = float(opt(args, config, "english_threshold", cfg.english_threshold))
    cfg.quality_keep_fraction = float(
        opt(args, config, "quality_keep_fraction", cfg.quality_keep_fraction)
    )
    cfg.stopword_min_count = int(
        opt(args, config, "stopword_min_count", cfg.stopword_min_count)
    )
    cfg.stopword_distinct = bool(opt(args, config, "stopword_distinct", cfg.stopword_distinct))
    for name, thr in opt(args, config, "repetition_thresholds", {}).items():
        cfg.repetition_thresholds[name] = float(thr)

    stage_names = [s for s in opt(args, config, "stages", "english,repetition,stopword").split(",") if s]
    pool = read_pool(args.pool)
    result = run_pipeline(pool, build_stages(stage_names, cfg), threads=_threads(args, config))
    write_pool(args.output, result.pool)
    outputs = [args.output]
    if args.stats:
        write_csv(
            args.stats,
            [
                "stage",
                "docs_in",
                "docs_kept",
                "tokens_in",
                "tokens_kept",
                "retention_docs",
                "retention_tokens",
            ],
            result.stats_rows(),
        )
        outputs.append(args.stats)
    write_manifest(args.output, args, {}, [args.pool], outputs)
    print(
        f"filtered {result.cumulative.docs_in} -> {result.cumulative.docs_kept} docs "
        f"(token retention {result.cumulative.retention_tokens:.4f}) via {stage_names}"
    )
    return EXIT_OK


def cmd_inject(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    seed = int(opt(args, config, "seed", 0))
    ratio = float(opt(args, config, "ratio", 0))
    kind = JunkKind(opt(args, config, "kind", JunkKind.RANDOM_STRINGS.value))
    pool = read_pool(args.pool)
    if kind is JunkKind.SHUFFLED_DOCS:
        if not args.junk_source:
            raise UsageError("--junk-source is required for --kind shuffled_docs")
        source = shuffled_junk_stream(read_documents(args.junk_source), seed)
        inputs = [args.pool, args.junk_source]
    else:
        vocab_seed = int(opt(args, config, "vocab_seed", seed))
        source = random_junk_stream(pool, build_vocab(vocab_seed), seed)
        inputs = [args.pool]
    injected = inject(pool, InjectionSpec(kind=kind, ratio=ratio, seed=seed), source)
    write_pool(args.output, injected)
    write_manifest(args.output, args, {"seed": seed}, inputs, [args.output])
    print(
        f"injected to {injected.total_tokens} tokens "
        f"({len(injected)} docs), label {injected.label!r}"
    )
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    records, errors = parse_run_log(args.runs)
    for err in errors:
        print(f"{args.runs}: line {err.lineno}: {err.message}", file=sys.stderr)
    if errors:
        raise ValidationError(f"{len(errors)} malformed line(s) in {args.runs}")
    if args.validate_only:
        print(f"validated {len(records)} records from {args.runs}")
        return EXIT_OK
    if not args.output:
        raise UsageError("--output is required unless --validate-only is set")
    write_run_log(args.output, records)
    write_manifest(args.output, args, {}, [args.runs], [args.output])
    print(f"ingested {len(records)} records -> {args.output}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    records = load_run_log(args.runs)
    rows = []
    for i, record in enumerate(records):
        rows.append(
            {
                "record_ref": f"{record.dataset_label}#{i}",
                "dataset_label": record.dataset_label,
                "model_name": record.model.name,
                "model_params": record.model.total_params,
                "pool_tokens": record.pool_tokens,
                "train_tokens": record.train_tokens,
                "epochs": epochs(record),
                "flops": compute_flops(record),
                "best_eval": best_eval(record),
            }
        )
    rows.sort(key=lambda r: (r["dataset_label"], r["model_params"], r["train_tokens"]))
    fields = [
        "record_ref",
        "dataset_label",
        "model_name",
        "model_params",
        "pool_tokens",
        "train_tokens",
        "epochs",
        "flops",
        "best_eval",
    ]
    write_csv(args.output, fields, rows)
    write_manifest(args.output, args, {}, [args.runs], [args.output])
    print(f"reported {len(rows)} runs -> {args.output}")
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace) -> int:
    records = load_run_log(args.runs)
    points = [
        FrontierPoint(
            compute=compute_flops(record),
            loss=best_eval(record),
            dataset_label=record.dataset_label,
            record_ref=f"{record.dataset_label}#{i}",
        )
        for i, record in enumerate(records)
    ]
    frontier = pareto_frontier(points)
    rows = [
        {
            "compute": p.compute,
            "loss": p.loss,
            "dataset_label": p.dataset_label,
            "record_ref": p.record_ref,
        }
        for p in frontier
    ]
    write_csv(args.output, ["compute", "loss", "dataset_label", "record_ref"], rows)
    write_manifest(args.output, args, {}, [args.runs], [args.output])
    print(f"frontier has {len(frontier)} of {len(points)} points -> {args.output}")
    return EXIT_OK


def cmd_crossing(args: argparse.Namespace) -> int:
    records = load_run_log(args.runs)
    eval_sets = args.eval_sets.split(",") if args.eval_sets else None
    pool_runs = [r for r in records if r.dataset_label == args.pool_label]
    filtered_runs = [r for r in records if r.dataset_label == args.filtered_label]
    if not pool_runs or not filtered_runs:
        raise ValidationError(
            f"need runs for both labels {args.pool_label!r} and {args.filtered_label!r}"
        )
    cells = sorted(
        {(r.model.total_params, r.pool_tokens) for r in pool_runs}
        & {(r.model.total_params, r.pool_tokens) for r in filtered_runs}
    )
    if not cells:
        raise ValidationError("no (model size, pool size) cell is present for both labels")
    rows = []
    for model_params, pool_tokens in cells:
        cp = crossing_point(
            [r for r in pool_runs if (r.model.total_params, r.pool_tokens) == (model_params, pool_tokens)],
            [r for r in filtered_runs if (r.model.total_params, r.pool_tokens) == (model_params, pool_tokens)],
            model_params,
            pool_tokens,
            eval_sets,
        )
        rows.append(
            {
                "model_params": cp.model_params,
                "pool_tokens": cp.pool_tokens,
                "crossing_tokens": cp.crossing_tokens,
                "epochs_at_cross": cp.epochs_at_cross,
                "observed": cp.observed,
                "extreme_epochs": cp.extreme_epochs,
            }
        )
    fields = [
        "model_params",
        "pool_tokens",
        "crossing_tokens",
        "epochs_at_cross",
        "observed",
        "extreme_epochs",
    ]
    write_csv(args.output, fields, rows)
    write_manifest(args.output, args, {}, [args.runs], [args.output])
    print(f"computed {len(rows)} crossing cells -> {args.output}")
    return EXIT_OK


def read_crossings_csv(path: str | Path) -> list[CrossingPoint]:
    crossings = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            raw = row["crossing_tokens"]
            crossings.append(
                CrossingPoint(
                    model_params=int(float(row["model_params"])),
                    pool_tokens=int(float(row["pool_tokens"])),
                    crossing_tokens=None if raw == "NEVER" else float(raw),
                    observed=row["observed"] == "True",
                )
            )
    return crossings


def _law_to_json(law: ThresholdLaw, quads: dict[int, tuple[float, float, float]]) -> dict:
    return {
        "method": law.method,
        "parameter": law.parameter,
        "alpha": law.alpha,
        "beta": law.beta,
        "r2": law.r2,
        "points": [
            {
                "model_params": p.model_params,
                "pool_tokens": p.pool_tokens,
                "crossing_tokens": p.crossing_tokens,
                "compute": p.compute,
            }
            for p in law.points
        ],
        "quadratics": {str(m): list(c) for m, c in sorted(quads.items())},
        "extrapolation": {
            "pool_tokens": REFERENCE_POOL_TOKENS,
            "compute": extrapolate_compute(law, REFERENCE_POOL_TOKENS),
        },
    }


def cmd_scaling_law(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    crossings = read_crossings_csv(args.crossings)
    by_model: dict[int, list[CrossingPoint]] = {}
    for cp in crossings:
        by_model.setdefault(cp.model_params, []).append(cp)
    quads = {}
    for model_params, cell in sorted(by_model.items()):
        finite = [c for c in cell if not c.never]
        if len(finite) < 3:
            print(
                f"warning: model {model_params}: only {len(finite)} finite crossings, skipped",
                file=sys.stderr,
            )
            continue
        quads[model_params] = fit_crossing_quadratic(cell)

    method = opt(args, config, "method", "tpp")
    if method == "tpp":
        ratio = float(opt(args, config, "ratio", 600.0))
        if args.configs:
            with open(args.configs, "r", encoding="utf-8") as fh:
                configs = [ModelConfig(**o) for o in json.load(fh)]
        else:
            configs = bundled_model_configs()
        law = fit_threshold_tokens_per_param(quads, configs, ratio)
    elif method == "epoch":
        law = fit_threshold_epoch_constraint(quads, float(opt(args, config, "epochs", 4.0)))
    else:
        raise UsageError(f"--method must be tpp or epoch, got {method!r}")

    _write_json(args.output, _law_to_json(law, {m: q.coeffs for m, q in quads.items()}))
    outputs = [args.output]
    if args.points_csv:
        rows = [
            {
                "model_params": p.model_params,
                "pool_tokens": p.pool_tokens,
                "crossing_tokens": p.crossing_tokens,
                "compute": p.compute,
            }
            for p in law.points
        ]
        write_csv(
            args.points_csv,
            ["model_params", "pool_tokens", "crossing_tokens", "compute"],
            rows,
        )
        outputs.append(args.points_csv)
    write_manifest(args.output, args, {}, [args.crossings], outputs)
    print(
        f"{law.method}: compute = {law.alpha:.6g} * pool^{law.beta:.6g} "
        f"(r2={law.r2:.6f}), 240T-token compute {law.predict_compute(REFERENCE_POOL_TOKENS):.6g}"
    )
    return EXIT_OK


def cmd_extrapolate(args: argparse.Namespace) -> int:
    with open(args.law, "r", encoding="utf-8") as fh:
        law_obj = json.load(fh)
    pool_tokens = float(args.pool_tokens)
    law = ThresholdLaw(
        method=law_obj["method"],
        parameter=law_obj["parameter"],
        points=tuple(
            ThresholdPoint(
                model_params=p["model_params"],
                pool_tokens=p["pool_tokens"],
                crossing_tokens=p["crossing_tokens"],
                compute=p["compute"],
            )
            for p in law_obj["points"]
        ),
        alpha=law_obj["alpha"],
        beta=law_obj["beta"],
        r2=law_obj["r2"],
    )
    compute = extrapolate_compute(law, pool_tokens)
    print(repr(compute))
    if args.output:
        _write_json(args.output, {"pool_tokens": pool_tokens, "compute": compute})
        write_manifest(args.output, args, {}, [args.law], [args.output])
    return EXIT_OK


def cmd_slice_loss(args: argparse.Namespace) -> int:
    with open(args.slice, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    slc = EvalSlice(
        position_losses=tuple(float(v) for v in obj["position_losses"]),
        context_length=int(obj.get("context_length", len(obj["position_losses"]))),
    )
    ts = [int(t) for t in args.t.split(",")]
    rows = [{"t": t, "mean_loss": slice_loss(slc, t)} for t in ts]
    if args.output:
        write_csv(args.output, ["t", "mean_loss"], rows)
        write_manifest(args.output, args, {}, [args.slice], [args.output])
    else:
        for row in rows:
            print(f"{row['t']},{_csv_value(row['mean_loss'])}")
    return EXIT_OK


def cmd_verify_theory(args: argparse.Namespace) -> int:
    if not args.prop1 and not args.filter_fact:
        raise UsageError("choose at least one of --prop1 / --filter-fact")
    seed = args.seed
    verdicts = []
    if args.prop1:
        for i in range(args.trials):
            verdicts.append({"check": "rank_necessity", **run_rank_necessity_trial(seed + i)})
    if args.filter_fact:
        for i in range(args.trials):
            verdicts.append({"check": "filter_improvement", **run_filter_fact_trial(seed + i)})
    all_pass = all(v["pass"] for v in verdicts)
    lines = [json.dumps(v, sort_keys=True) for v in verdicts]
    summary = json.dumps(
        {"trials": len(verdicts), "passed": sum(v["pass"] for v in verdicts), "pass": all_pass},
        sort_keys=True,
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines + [summary]) + "\n")
        write_manifest(args.output, args, {"seed": seed}, [], [args.output])
    for line in lines:
        print(line)
    print(summary)
    return EXIT_OK if all_pass else EXIT_DOMAIN_ERROR


def _heuristic_mock_verdict(doc_text: str, question: str, answer: str) -> Verdict:
    text = doc_text.lower()
    answer_words = [w for w in answer.lower().split() if len(w) > 2]
    if answer_words and all(w in text for w in answer_words):
        return Verdict.SUPPORT
    question_words = [w for w in question.lower().split() if len(w) > 3]
    if any(w in text for w in question_words):
        return Verdict.RELATED
    return Verdict.UNRELATED


def cmd_judge(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if not args.mock and not args.endpoint:
        raise UsageError("choose --mock or --endpoint <url>")
    qa_items = read_qa_items(args.qa)
    pool = read_pool(args.pool)
    if args.mock:
        client = mock_judge_client(_heuristic_mock_verdict)
    else:
        client = JudgeClient(
            endpoint=args.endpoint,
            model_name=opt(args, config, "model_name", "judge"),
            timeout=float(opt(args, config, "timeout", 30.0)),
            max_concurrency=int(opt(args, config, "max_concurrency", 4)),
        )
    combined = JudgeRun(judgements=[], failures=[])
    for qa in qa_items:
        run = judge_documents(keyword_match(pool, qa), qa, client)
        combined.judgements.extend(run.judgements)
        combined.failures.extend(run.failures)
    write_judgements(args.output, combined)
    outputs = [args.output]
    if args.aggregate:
        rows = aggregate_judgements(combined.judgements, qa_items)
        write_csv(args.aggregate, ["subject"] + VERDICT_COLUMNS, rows)
        outputs.append(args.aggregate)
    write_manifest(args.output, args, {}, [args.qa, args.pool], outputs)
    print(
        f"judged {len(combined.judgements)} documents "
        f"({len(combined.failures)} failures) across {len(qa_items)} QA items"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and dispatch.
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poollab",
        description="Data-curation experiment toolkit: pools, filters, junk, scaling laws.",
    )
    parser.add_argument("--version", action="version", version=f"poollab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<command>")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config merged with flags (flags win)")
        p.add_argument("--threads", type=int, help="worker count; 1 = fully sequential")

    p = sub.add_parser("sample", help="sample a token-budgeted pool from a document stream")
    p.add_argument("--input", required=True, help="input documents JSONL")
    p.add_argument("--target-tokens", dest="target_tokens", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--label")
    p.add_argument("--output", required=True)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("filter", help="run a filter pipeline over a pool")
    p.add_argument("--pool", required=True)
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--stages", help="comma list: english,repetition,stopword,dedup,quality")
    p.add_argument("--english-threshold", dest="english_threshold", type=float)
    p.add_argument("--quality-keep-fraction", dest="quality_keep_fraction", type=float)
    p.add_argument("--stopword-min-count", dest="stopword_min_count", type=int)
    p.add_argument(
        "--stopword-distinct", dest="stopword_distinct", action="store_const", const=True
    )
    p.add_argument("--output", required=True)
    p.add_argument("--stats", help="per-stage retention CSV")
    common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("inject", help="mix junk documents into a pool at a token ratio")
    p.add_argument("--pool", required=True)
    p.add_argument("--kind", choices=[k.value for k in JunkKind])
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--vocab-seed", dest="vocab_seed", type=int)
    p.add_argument("--junk-source", dest="junk_source", help="JSONL docs to shuffle")
    p.add_argument("--output", required=True)
    common(p)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("ingest", help="validate and persist a training-run log")
    p.add_argument("--runs", required=True)
    p.add_argument("--output")
    p.add_argument("--validate-only", dest="validate_only", action="store_true")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("report", help="per-run summary CSV (epochs, compute, best loss)")
    p.add_argument("--runs", required=True)
    p.add_argument("--output", required=True)
    common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pareto", help="compute-versus-loss Pareto frontier")
    p.add_argument("--runs", required=True)
    p.add_argument("--output", required=True)
    common(p)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("crossing", help="pool-vs-filtered crossing points per cell")
    p.add_argument("--runs", required=True)
    p.add_argument("--pool-label", dest="pool_label", required=True)
    p.add_argument("--filtered-label", dest="filtered_label", required=True)
    p.add_argument("--eval-sets", dest="eval_sets", help="comma list; default: all present")
    p.add_argument("--output", required=True)
    common(p)
    p.set_defaults(func=cmd_crossing)

    p = sub.add_parser("scaling-law", help="fit a compute threshold law from crossings")
    p.add_argument("--crossings", required=True, help="CSV from the crossing command")
    p.add_argument("--method", choices=["tpp", "epoch"])
    p.add_argument("--ratio", type=float, help="tokens per non-embedding parameter (tpp)")
    p.add_argument("--epochs", type=float, help="epoch count (epoch method)")
    p.add_argument("--configs", help="model configs JSON; default: bundled reference")
    p.add_argument("--output", required=True, help="law summary JSON")
    p.add_argument("--points-csv", dest="points_csv", help="threshold points CSV")
    common(p)
    p.set_defaults(func=cmd_scaling_law)

    p = sub.add_parser("extrapolate", help="evaluate a fitted law at a pool size")
    p.add_argument("--law", required=True, help="JSON from scaling-law")
    p.add_argument("--pool-tokens", dest="pool_tokens", required=True)
    p.add_argument("--output")
    common(p)
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("slice-loss", help="mean loss over initial context positions")
    p.add_argument("--slice", required=True, help="JSON with position_losses")
    p.add_argument("--t", required=True, help="position count(s), comma list")
    p.add_argument("--output")
    common(p)
    p.set_defaults(func=cmd_slice_loss)

    p = sub.add_parser("verify-theory", help="numeric checks of the closed-form results")
    p.add_argument("--prop1", action="store_true", help="rank-necessity check")
    p.add_argument("--filter-fact", dest="filter_fact", action="store_true")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    common(p)
    p.set_defaults(func=cmd_verify_theory)

    p = sub.add_parser("judge", help="keyword-match documents and classify with a judge")
    p.add_argument("--qa", required=True, help="QA items JSONL")
    p.add_argument("--pool", required=True)
    p.add_argument("--mock", action="store_true")
    p.add_argument("--endpoint")
    p.add_argument("--model-name", dest="model_name")
    p.add_argument("--timeout", type=float)
    p.add_argument("--max-concurrency", dest="max_concurrency", type=int)
    p.add_argument("--output", required=True, help="judgements JSONL")
    p.add_argument("--aggregate", help="per-subject verdict-count CSV")
    common(p)
    p.set_defaults(func=cmd_judge)

    return parser


def dispatch(argv: Sequence[str]) -> int:
    """Run one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:  # argparse handles --help and usage errors
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PoolLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""Operator command line: dataset preparation, evaluation, comparison, serving.

Run directory layout written by ``eval`` and consumed by ``compare``:
    scores.jsonl    per-sample metric breakdowns, (bucket, id)-ordered
    aggregate.json  overall and per-bucket means
    manifest.json   backend/provider/bucket configs, corpus hash, timestamp
The manifest is the only file carrying a clock value, so re-running a command
with identical inputs reproduces every other artifact byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import evalharness
from .backends import ExtractiveBackend, RemoteBackend, RemoteBackendConfig
from .corpus import (
    DEFAULT_BUCKETS,
    TaskKind,
    parse_dataset,
    split_by_task,
    write_jsonl,
)
from .embeddings import DeterministicProvider, RemoteConfig, RemoteProvider
from .store import DEFAULT_DB_PATH, ENV_DB_URL, SummaryStore

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class CliError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medsum",
        description="Medical summarization service and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="split a JSON dataset into task corpora")
    p_ingest.add_argument("--input", required=True, help="dataset file (JSON array or JSONL)")
    p_ingest.add_argument("--out", required=True, help="output directory for <task>.jsonl splits")
    p_ingest.add_argument("--strict", action="store_true", help="abort on malformed records")

    p_eval = sub.add_parser("eval", help="run a backend over a corpus and score it")
    p_eval.add_argument("--corpus", required=True, help="task corpus JSONL file")
    p_eval.add_argument("--task", required=True, choices=[t.value for t in TaskKind])
    p_eval.add_argument("--backend", required=True, help="'extractive' or 'remote'")
    p_eval.add_argument("--provider", required=True, help="'det', 'det:seed=N,dim=D' or 'remote'")
    p_eval.add_argument("--out", required=True, help="run directory to create")

    p_cmp = sub.add_parser("compare", help="compare two eval runs on the same corpus")
    p_cmp.add_argument("--a", required=True, help="run directory of backend A")
    p_cmp.add_argument("--b", required=True, help="run directory of backend B")
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.add_argument("--charts", action="store_true", help="also emit the four metric SVGs")

    p_serve = sub.add_parser("serve", help="run the REST service")
    p_serve.add_argument("--config", help="JSON config file (env vars override it, flags override env)")
    p_serve.add_argument("--addr", help="listen address host:port")
    p_serve.add_argument("--db", help="sqlite database path")
    p_serve.add_argument("--backend", choices=["extractive", "remote"], help="summarizer backend")
    return parser


def parse_args(argv) -> argparse.Namespace:
    return _build_parser().parse_args(argv)


def _make_backend(spec: str):
    if spec == "extractive":
        return ExtractiveBackend()
    if spec == "remote":
        url = os.environ.get("MEDSUM_BACKEND_URL")
        if not url:
            raise CliError("backend 'remote' needs MEDSUM_BACKEND_URL")
        return RemoteBackend(
            RemoteBackendConfig(endpoint=url, auth_token=os.environ.get("MEDSUM_BACKEND_KEY", ""))
        )
    raise CliError(f"unknown backend {spec!r}")


def _make_provider(spec: str):
    if spec == "remote":
        url = os.environ.get("MEDSUM_EMBED_URL")
        if not url:
            raise CliError("provider 'remote' needs MEDSUM_EMBED_URL")
        return RemoteProvider(
            RemoteConfig(endpoint=url, auth_token=os.environ.get("MEDSUM_EMBED_KEY", ""))
        )
    if spec == "det" or spec.startswith("det:"):
        seed, dim = 0, 64
        if ":" in spec:
            for part in spec.split(":", 1)[1].split(","):
                key, _, value = part.partition("=")
                if key == "seed":
                    seed = int(value)
                elif key == "dim":
                    dim = int(value)
                else:
                    raise CliError(f"unknown provider option {key!r}")
        return DeterministicProvider(dim=dim, seed=seed)
    raise CliError(f"unknown provider {spec!r}")


def _load_corpus(path: str):
    with open(path, "rb") as fh:
        entries, skipped = parse_dataset(fh)
    if skipped:
        print(f"warning: skipped {skipped} malformed records in {path}", file=sys.stderr)
    return entries


def cmd_ingest(args) -> int:
    with open(args.input, "rb") as fh:
        entries, skipped = parse_dataset(fh, strict=args.strict)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    split = split_by_task(entries)
    counts = []
    for task in TaskKind:
        write_jsonl(split[task], out / f"{task.value}.jsonl")
        counts.append(f"{task.value}={len(split[task])}")
    suffix = f", skipped={skipped}" if skipped else ""
    print(f"ingested {len(entries)} records: {', '.join(counts)}{suffix}")
    return EXIT_OK


def cmd_eval(args) -> int:
    task = TaskKind(args.task)
    corpus = _load_corpus(args.corpus)
    backend = _make_backend(args.backend)
    provider = _make_provider(args.provider)
    bucket_config = DEFAULT_BUCKETS[task]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "incomplete"
    marker.write_text("run in progress\n")
    try:
        scores = evalharness.run_eval(corpus, task, backend, provider, bucket_config)
        report = evalharness.aggregate(scores, bucket_config)
        (out / "scores.jsonl").write_bytes(evalharness.emit_scores_jsonl(scores))
        (out / "aggregate.json").write_bytes(evalharness.emit_report(report, "json"))
        (out / "aggregate.csv").write_bytes(evalharness.emit_report(report, "csv"))
        manifest = {
            "task": task.value,
            "backend": args.backend,
            "backend_id": getattr(backend, "backend_id", "unknown"),
            "provider": args.provider,
            "bucket_config": {
                "short_max": bucket_config.short_max,
                "medium_max": bucket_config.medium_max,
            },
            "corpus_hash": evalharness.corpus_hash(sorted(corpus, key=lambda e: e.id)),
            "sample_count": len(scores),
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    finally:
        if marker.exists() and (out / "manifest.json").exists():
            marker.unlink()
    degenerate = sum(1 for s in scores if s.degenerate)
    print(f"evaluated {len(scores)} samples ({degenerate} degenerate) -> {out}")
    return EXIT_OK


def _load_run(run_dir: str):
    run = Path(run_dir)
    manifest = json.loads((run / "manifest.json").read_text())
    scores = evalharness.load_scores_jsonl((run / "scores.jsonl").read_bytes())
    return manifest, scores


def cmd_compare(args) -> int:
    manifest_a, scores_a = _load_run(args.a)
    manifest_b, scores_b = _load_run(args.b)
    if manifest_a["corpus_hash"] != manifest_b["corpus_hash"]:
        raise CliError("runs were made on different corpora (corpus_hash mismatch)")
    if manifest_a["task"] != manifest_b["task"]:
        raise CliError("runs cover different tasks")
    task = TaskKind(manifest_a["task"])
    bucket_config = DEFAULT_BUCKETS[task]
    report = evalharness.compare(scores_a, scores_b, bucket_config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.json").write_bytes(evalharness.emit_report(report, "json"))
    (out / "comparison.csv").write_bytes(evalharness.emit_report(report, "csv"))
    if args.charts:
        for metric in evalharness.METRIC_KEYS:
            (out / f"chart_{metric}.svg").write_bytes(
                evalharness.emit_chart_svg(report, metric)
            )
    print(f"compared {len(report.entry_ids)} samples -> {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    config = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    db_path = (
        args.db
        or os.environ.get(ENV_DB_URL)
        or config.get("db", DEFAULT_DB_PATH)
    )
    addr = args.addr or os.environ.get("MEDSUM_ADDR") or config.get("addr")
    backend_spec = args.backend or config.get("backend", "extractive")
    store = SummaryStore(db_path)
    serve(store, _make_backend(backend_spec), addr=addr)
    return EXIT_OK


def execute(args) -> int:
    handlers = {
        "ingest": cmd_ingest,
        "eval": cmd_eval,
        "compare": cmd_compare,
        "serve": cmd_serve,
    }
    return handlers[args.command](args)


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return execute(args)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"medsum: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

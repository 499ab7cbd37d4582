"""Evaluation harness: run a backend over a task corpus, score every sample
with the four metrics, aggregate by length bucket, and emit table- and
chart-style comparison artifacts.

All emitted payloads are byte-stable across runs: floats are formatted with a
fixed number of decimals, keys have a fixed order, and samples are ordered by
(bucket, entry_id). The run manifest is the only file carrying a clock value.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .backends import BackendError, SummarizeRequest
from .corpus import (
    BucketConfig,
    DatasetEntry,
    LengthBucket,
    TaskKind,
    assign_bucket,
    word_count,
)
from .metrics import (
    BertScoreBreakdown,
    BleuBreakdown,
    BleuParams,
    MetricReport,
    RougeLBreakdown,
    ScoringError,
    score_pair,
)

METRIC_LABELS = ("BLEU", "ROUGE-L", "BERT Score", "SpaCy Similarity")
METRIC_KEYS = ("bleu", "rouge_l", "bert_f1", "spacy_sim")

SERIES_COLOR_A = "#1f77b4"  # blue
SERIES_COLOR_B = "#ff7f0e"  # orange
BUCKET_COLORS = {
    LengthBucket.SHORT: "#c8e6c9",   # green band
    LengthBucket.MEDIUM: "#fff9c4",  # yellow band
    LengthBucket.LONG: "#ffcdd2",    # red band
}


class HarnessError(Exception):
    pass


class ProviderAbort(HarnessError):
    """Embedding provider died mid-run; carries how many samples completed."""

    def __init__(self, completed: int, cause: Exception):
        super().__init__(f"provider failed after {completed} samples: {cause}")
        self.completed = completed


ZERO_REPORT = MetricReport(
    bleu=BleuBreakdown((), 0.0, 0, 0, 0.0, degenerate=True),
    rouge_l=RougeLBreakdown(0, 0.0, 0.0, 1.0, 0.0),
    bert=BertScoreBreakdown(0.0, 0.0, 0.0),
    spacy_sim=0.0,
)


@dataclass(frozen=True)
class SampleScore:
    entry_id: str
    task: TaskKind
    bucket: LengthBucket
    input_words: int
    report: MetricReport
    backend_id: str
    degenerate: bool = False

    def metric_values(self) -> dict[str, float]:
        return {
            "bleu": self.report.bleu.score,
            "rouge_l": self.report.rouge_l.score,
            "bert_f1": self.report.bert.f1,
            "spacy_sim": self.report.spacy_sim,
        }


@dataclass(frozen=True)
class AggregateReport:
    backend_id: str
    task: TaskKind
    overall: dict[str, float]
    per_bucket: dict[LengthBucket, dict[str, float] | None]
    sample_count: int
    degenerate_count: int
    bucket_counts: dict[LengthBucket, int]


@dataclass(frozen=True)
class ComparisonReport:
    task: TaskKind
    aggregate_a: AggregateReport
    aggregate_b: AggregateReport
    entry_ids: list[str]
    buckets: list[LengthBucket]
    series_a: dict[str, list[float]]
    series_b: dict[str, list[float]]


def corpus_hash(corpus: Iterable[DatasetEntry]) -> str:
    h = hashlib.sha256()
    for entry in corpus:
        h.update(
            json.dumps(
                {"id": entry.id, "inputs": entry.inputs, "target": entry.target},
                sort_keys=True,
                ensure_ascii=False,
            ).encode("utf-8")
        )
        h.update(b"\n")
    return h.hexdigest()


def run_eval(
    corpus: Sequence[DatasetEntry],
    task: TaskKind,
    backend,
    provider,
    bucket_config: BucketConfig,
    bleu_params: BleuParams = BleuParams(),
) -> list[SampleScore]:
    """Summarize and score every entry. Backend failures become degenerate
    zero-score samples; an embedding-provider failure aborts the run."""
    scores: list[SampleScore] = []
    for entry in sorted(corpus, key=lambda e: e.id):
        words = word_count(entry.inputs)
        bucket = assign_bucket(words, bucket_config)
        try:
            output = backend.summarize(SummarizeRequest(task=task, text=entry.inputs))
            summary = output.summary
        except BackendError:
            summary = ""
        if not summary.strip():
            scores.append(
                SampleScore(
                    entry_id=entry.id,
                    task=task,
                    bucket=bucket,
                    input_words=words,
                    report=ZERO_REPORT,
                    backend_id=getattr(backend, "backend_id", "unknown"),
                    degenerate=True,
                )
            )
            continue
        try:
            report = score_pair(summary, entry.target, provider, bleu_params)
        except ScoringError as exc:
            raise ProviderAbort(len(scores), exc) from exc
        scores.append(
            SampleScore(
                entry_id=entry.id,
                task=task,
                bucket=bucket,
                input_words=words,
                report=report,
                backend_id=getattr(backend, "backend_id", "unknown"),
            )
        )
    return scores


def _means(scores: Sequence[SampleScore]) -> dict[str, float]:
    n = len(scores)
    sums = {k: 0.0 for k in METRIC_KEYS}
    for score in scores:
        for key, value in score.metric_values().items():
            sums[key] += value
    return {k: sums[k] / n for k in METRIC_KEYS}


def aggregate(scores: Sequence[SampleScore], config: BucketConfig) -> AggregateReport:
    """Arithmetic means per metric, overall and per bucket. Degenerate samples
    stay in as zeros; an empty bucket gets a null mean, not 0."""
    if not scores:
        raise HarnessError("cannot aggregate an empty score list")
    backend_ids = {s.backend_id for s in scores}
    tasks = {s.task for s in scores}
    if len(backend_ids) > 1:
        raise HarnessError(f"mixed backend ids: {sorted(backend_ids)}")
    if len(tasks) > 1:
        raise HarnessError(f"mixed tasks: {sorted(t.value for t in tasks)}")
    per_bucket: dict[LengthBucket, dict[str, float] | None] = {}
    bucket_counts: dict[LengthBucket, int] = {}
    for bucket in LengthBucket:
        members = [s for s in scores if s.bucket is bucket]
        bucket_counts[bucket] = len(members)
        per_bucket[bucket] = _means(members) if members else None
    return AggregateReport(
        backend_id=scores[0].backend_id,
        task=scores[0].task,
        overall=_means(scores),
        per_bucket=per_bucket,
        sample_count=len(scores),
        degenerate_count=sum(1 for s in scores if s.degenerate),
        bucket_counts=bucket_counts,
    )


def _ordered(scores: Sequence[SampleScore]) -> list[SampleScore]:
    return sorted(scores, key=lambda s: (s.bucket.value, s.entry_id))


def compare(
    a: Sequence[SampleScore],
    b: Sequence[SampleScore],
    config: BucketConfig,
) -> ComparisonReport:
    """Aligned per-sample series for two backends over the same corpus,
    ordered by (bucket ascending, entry_id). Bucket placement follows run A."""
    ids_a = {s.entry_id for s in a}
    ids_b = {s.entry_id for s in b}
    if ids_a != ids_b:
        diff = sorted(ids_a.symmetric_difference(ids_b))
        raise HarnessError(f"entry id mismatch: {diff}")
    tasks = {s.task for s in a} | {s.task for s in b}
    if len(tasks) > 1:
        raise HarnessError(f"mixed tasks: {sorted(t.value for t in tasks)}")
    by_id_b = {s.entry_id: s for s in b}
    ordered_a = _ordered(a)
    series_a = {k: [] for k in METRIC_KEYS}
    series_b = {k: [] for k in METRIC_KEYS}
    for sample in ordered_a:
        other = by_id_b[sample.entry_id]
        for key, value in sample.metric_values().items():
            series_a[key].append(value)
        for key, value in other.metric_values().items():
            series_b[key].append(value)
    return ComparisonReport(
        task=ordered_a[0].task if ordered_a else next(iter(tasks), TaskKind.PASSAGE),
        aggregate_a=aggregate(list(a), config),
        aggregate_b=aggregate(list(b), config),
        entry_ids=[s.entry_id for s in ordered_a],
        buckets=[s.bucket for s in ordered_a],
        series_a=series_a,
        series_b=series_b,
    )


def _f4(value: float | None):
    return None if value is None else float(f"{value:.4f}")


def _fmt4(value: float) -> str:
    return f"{value:.4f}"


def sample_score_to_json(score: SampleScore) -> str:
    """One stable JSON line per sample, floats at 10 decimals."""
    r = score.report

    def f(x: float) -> float:
        return float(f"{x:.10f}")

    payload = {
        "entry_id": score.entry_id,
        "task": score.task.value,
        "bucket": score.bucket.label,
        "input_words": score.input_words,
        "backend_id": score.backend_id,
        "degenerate": score.degenerate,
        "bleu": {
            "score": f(r.bleu.score),
            "precisions": [f(p) for p in r.bleu.precisions],
            "brevity_penalty": f(r.bleu.brevity_penalty),
            "candidate_len": r.bleu.candidate_len,
            "reference_len": r.bleu.reference_len,
        },
        "rouge_l": {
            "score": f(r.rouge_l.score),
            "lcs_len": r.rouge_l.lcs_len,
            "precision": f(r.rouge_l.precision),
            "recall": f(r.rouge_l.recall),
            "beta": f(r.rouge_l.beta),
        },
        "bert": {
            "precision": f(r.bert.precision),
            "recall": f(r.bert.recall),
            "f1": f(r.bert.f1),
        },
        "spacy_sim": f(r.spacy_sim),
    }
    return json.dumps(payload, ensure_ascii=False)


def sample_score_from_json(line: str) -> SampleScore:
    d = json.loads(line)
    bucket = {b.label: b for b in LengthBucket}[d["bucket"]]
    report = MetricReport(
        bleu=BleuBreakdown(
            precisions=tuple(d["bleu"]["precisions"]),
            brevity_penalty=d["bleu"]["brevity_penalty"],
            candidate_len=d["bleu"]["candidate_len"],
            reference_len=d["bleu"]["reference_len"],
            score=d["bleu"]["score"],
            degenerate=d["degenerate"],
        ),
        rouge_l=RougeLBreakdown(
            lcs_len=d["rouge_l"]["lcs_len"],
            precision=d["rouge_l"]["precision"],
            recall=d["rouge_l"]["recall"],
            beta=d["rouge_l"]["beta"],
            score=d["rouge_l"]["score"],
        ),
        bert=BertScoreBreakdown(
            precision=d["bert"]["precision"],
            recall=d["bert"]["recall"],
            f1=d["bert"]["f1"],
        ),
        spacy_sim=d["spacy_sim"],
    )
    return SampleScore(
        entry_id=d["entry_id"],
        task=TaskKind(d["task"]),
        bucket=bucket,
        input_words=d["input_words"],
        report=report,
        backend_id=d["backend_id"],
        degenerate=d["degenerate"],
    )


def load_scores_jsonl(data: bytes) -> list[SampleScore]:
    return [
        sample_score_from_json(line)
        for line in data.decode("utf-8").splitlines()
        if line.strip()
    ]


def emit_scores_jsonl(scores: Sequence[SampleScore]) -> bytes:
    lines = [sample_score_to_json(s) for s in _ordered(scores)]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def aggregate_to_dict(report: AggregateReport) -> dict:
    return {
        "backend_id": report.backend_id,
        "task": report.task.value,
        "sample_count": report.sample_count,
        "degenerate_count": report.degenerate_count,
        "overall": {k: _f4(report.overall[k]) for k in METRIC_KEYS},
        "per_bucket": {
            bucket.label: (
                None
                if report.per_bucket[bucket] is None
                else {k: _f4(report.per_bucket[bucket][k]) for k in METRIC_KEYS}
            )
            for bucket in LengthBucket
        },
        "bucket_counts": {
            bucket.label: report.bucket_counts[bucket] for bucket in LengthBucket
        },
    }


def comparison_to_dict(report: ComparisonReport) -> dict:
    return {
        "task": report.task.value,
        "backend_a": aggregate_to_dict(report.aggregate_a),
        "backend_b": aggregate_to_dict(report.aggregate_b),
        "entry_ids": report.entry_ids,
        "buckets": [b.label for b in report.buckets],
        "series_a": {k: [_f4(v) for v in report.series_a[k]] for k in METRIC_KEYS},
        "series_b": {k: [_f4(v) for v in report.series_b[k]] for k in METRIC_KEYS},
    }


def emit_report(report, fmt: str = "json") -> bytes:
    """Serialize an aggregate or comparison report with stable field order and
    4-decimal floats."""
    if isinstance(report, AggregateReport):
        if fmt == "json":
            return (json.dumps(aggregate_to_dict(report), indent=2) + "\n").encode("utf-8")
        if fmt == "csv":
            lines = ["metric,avg_score"]
            for label, key in zip(METRIC_LABELS, METRIC_KEYS):
                lines.append(f"{label},{_fmt4(report.overall[key])}")
            return ("\n".join(lines) + "\n").encode("utf-8")
    elif isinstance(report, ComparisonReport):
        if fmt == "json":
            return (json.dumps(comparison_to_dict(report), indent=2) + "\n").encode("utf-8")
        if fmt == "csv":
            lines = [f"metric,{report.aggregate_a.backend_id},{report.aggregate_b.backend_id}"]
            for label, key in zip(METRIC_LABELS, METRIC_KEYS):
                lines.append(
                    f"{label},{_fmt4(report.aggregate_a.overall[key])},"
                    f"{_fmt4(report.aggregate_b.overall[key])}"
                )
            return ("\n".join(lines) + "\n").encode("utf-8")
    raise HarnessError(f"cannot emit {type(report).__name__} as {fmt}")


def emit_chart_svg(report: ComparisonReport, metric: str) -> bytes:
    """Deterministic SVG line chart for one metric: backend A in blue,
    backend B in orange, background bands colored by length bucket."""
    if metric not in METRIC_KEYS:
        raise HarnessError(f"unknown metric {metric!r}")
    ys_a = report.series_a[metric]
    ys_b = report.series_b[metric]
    if not ys_a:
        raise HarnessError("empty comparison series")
    n = len(ys_a)
    width, height = 720, 360
    left, right, top, bottom = 60, 20, 30, 40
    plot_w = width - left - right
    plot_h = height - top - bottom

    def x(i: int) -> float:
        if n == 1:
            return left + plot_w / 2
        return left + plot_w * i / (n - 1)

    def y(value: float) -> float:
        clipped = min(max(value, 0.0), 1.0)
        return top + plot_h * (1.0 - clipped)

    label = dict(zip(METRIC_KEYS, METRIC_LABELS))[metric]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    # bucket bands: contiguous runs of the same bucket, half-sample margins
    run_start = 0
    for i in range(1, n + 1):
        if i == n or report.buckets[i] != report.buckets[run_start]:
            x0 = left if run_start == 0 else (x(run_start - 1) + x(run_start)) / 2
            x1 = left + plot_w if i == n else (x(i - 1) + x(i)) / 2
            color = BUCKET_COLORS[report.buckets[run_start]]
            parts.append(
                f'<rect x="{x0:.2f}" y="{top}" width="{x1 - x0:.2f}" '
                f'height="{plot_h}" fill="{color}"/>'
            )
            run_start = i
    # axes
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" '
        'stroke="#000000" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="#000000" stroke-width="1"/>'
    )
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        ty = y(tick)
        parts.append(
            f'<text x="{left - 8}" y="{ty:.2f}" font-size="10" '
            f'text-anchor="end" dominant-baseline="middle">{tick:.2f}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 8}" font-size="12" '
        'text-anchor="middle">sample index</text>'
    )
    parts.append(
        f'<text x="{left + plot_w / 2:.2f}" y="18" font-size="13" '
        f'text-anchor="middle">{label}</text>'
    )
    for series, color in ((ys_a, SERIES_COLOR_A), (ys_b, SERIES_COLOR_B)):
        points = " ".join(f"{x(i):.2f},{y(v):.2f}" for i, v in enumerate(series))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        for i, v in enumerate(series):
            parts.append(
                f'<circle cx="{x(i):.2f}" cy="{y(v):.2f}" r="2" fill="{color}"/>'
            )
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")

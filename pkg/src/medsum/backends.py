"""Summarizer backends: a remote completion endpoint driven by per-task
prompt templates, and a fully deterministic extractive baseline that needs no
model at all.

Extractive rules per task:
  * passage — top 3 sentences by summed within-document term frequency,
    earlier sentence wins ties, emitted in original order;
  * question — the last sentence ending in '?', else the sentence with the
    most interrogative keywords, else the first sentence;
  * conversation — up to 5 highest-TF sentences taken from patient-marked
    turns only (all turns when no markers are present).
"""

from __future__ import annotations

import math
import os
import re
import time
from collections import Counter
from dataclasses import dataclass
from importlib import resources

import requests

from .corpus import TaskKind
from .metrics import tokenize

ENV_BACKEND_URL = "MEDSUM_BACKEND_URL"
ENV_BACKEND_KEY = "MEDSUM_BACKEND_KEY"

# Rough words-per-token inflation used when budgeting against a model context.
TOKENS_PER_WORD = 1.3


class BackendError(Exception):
    """Backend could not produce a summary."""


class BackendUnavailable(BackendError):
    """Remote endpoint failed after all retries."""


class DegenerateOutput(BackendError):
    """Backend answered, but with an empty completion."""


@dataclass(frozen=True)
class SummarizeRequest:
    task: TaskKind
    text: str
    max_summary_tokens: int = 256

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("text must be non-empty")
        if self.max_summary_tokens < 8:
            raise ValueError("max_summary_tokens must be >= 8")


@dataclass(frozen=True)
class SummaryOutput:
    summary: str
    backend_id: str
    task: TaskKind
    truncated_input: bool
    latency: float


@dataclass(frozen=True)
class PromptTemplate:
    task: TaskKind
    template: str

    def __post_init__(self):
        if self.template.count("{text}") != 1:
            raise ValueError("template must contain exactly one {text} placeholder")


def load_default_template(task: TaskKind) -> PromptTemplate:
    text = (resources.files("medsum") / "templates" / f"{task.value}.txt").read_text(
        encoding="utf-8"
    )
    return PromptTemplate(task=task, template=text)


def render_prompt(template: PromptTemplate, text: str) -> str:
    return template.template.replace("{text}", text)


def truncate_to_budget(text: str, budget: int) -> tuple[str, bool]:
    """Head-truncate at a word boundary so ~word_count * 1.3 tokens fit."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    words = text.split()
    keep = max(1, math.floor(budget / TOKENS_PER_WORD))
    if len(words) <= keep:
        return text, False
    return " ".join(words[:keep]), True


_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    """Split after ./!/? followed by whitespace. Deliberately abbreviation-blind."""
    parts = _SENTENCE_END.split(text.strip())
    return [p.strip() for p in parts if p.strip()]


_SPEAKER = re.compile(r"^\s*(doctor|patient|d|p)\s*:\s*", re.IGNORECASE)
_PATIENT = re.compile(r"^\s*(patient|p)\s*:\s*", re.IGNORECASE)
_INTERROGATIVES = ("what", "why", "how", "when", "is", "can", "does", "should")


def _tf_scores(sentences: list[str]) -> list[float]:
    counts: Counter = Counter()
    per_sentence = []
    for sentence in sentences:
        tokens = [t for t in tokenize(sentence) if t.isalnum()]
        per_sentence.append(tokens)
        counts.update(tokens)
    return [sum(counts[t] for t in tokens) for tokens in per_sentence]


def _top_sentences(sentences: list[str], k: int) -> list[str]:
    scores = _tf_scores(sentences)
    # stable sort keeps the earlier sentence ahead on ties
    ranked = sorted(range(len(sentences)), key=lambda i: -scores[i])[:k]
    return [sentences[i] for i in sorted(ranked)]


def _extract_passage(text: str) -> str:
    sentences = split_sentences(text)
    return " ".join(_top_sentences(sentences, 3))


def _extract_question(text: str) -> str:
    sentences = split_sentences(text)
    questions = [s for s in sentences if s.endswith("?")]
    if questions:
        return questions[-1]
    def keyword_hits(sentence: str) -> int:
        return sum(1 for t in tokenize(sentence) if t in _INTERROGATIVES)
    best = max(sentences, key=keyword_hits)
    if keyword_hits(best) > 0:
        return best
    return sentences[0]


def _extract_conversation(text: str) -> str:
    lines = [line for line in text.splitlines() if line.strip()]
    patient_lines = [line for line in lines if _PATIENT.match(line)]
    pool_lines = patient_lines if patient_lines else lines
    sentences = []
    for line in pool_lines:
        sentences.extend(split_sentences(_SPEAKER.sub("", line)))
    if not sentences:
        sentences = split_sentences(text)
    return " ".join(_top_sentences(sentences, 5))


class ExtractiveBackend:
    """Deterministic offline baseline; a pure function of the request."""

    backend_id = "extractive"

    def summarize(self, req: SummarizeRequest) -> SummaryOutput:
        start = time.monotonic()
        if req.task is TaskKind.PASSAGE:
            summary = _extract_passage(req.text)
        elif req.task is TaskKind.QUESTION:
            summary = _extract_question(req.text)
        else:
            summary = _extract_conversation(req.text)
        return SummaryOutput(
            summary=summary,
            backend_id=self.backend_id,
            task=req.task,
            truncated_input=False,
            latency=time.monotonic() - start,
        )


@dataclass
class RemoteBackendConfig:
    endpoint: str
    auth_token: str = ""
    model: str = "default"
    timeout: float = 60.0
    retries: int = 2
    context_budget_tokens: int = 512
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.context_budget_tokens < 64:
            raise ValueError("context_budget_tokens must be >= 64")


class RemoteBackend:
    """Chat-completion-style client: POST {endpoint}/v1/completions."""

    def __init__(self, config: RemoteBackendConfig, templates: dict[TaskKind, PromptTemplate] | None = None):
        self.config = config
        self.templates = templates or {task: load_default_template(task) for task in TaskKind}
        self.backend_id = f"remote:{config.model}"

    @classmethod
    def from_env(cls) -> "RemoteBackend":
        url = os.environ.get(ENV_BACKEND_URL)
        if not url:
            raise ValueError(f"{ENV_BACKEND_URL} is not set")
        return cls(RemoteBackendConfig(endpoint=url, auth_token=os.environ.get(ENV_BACKEND_KEY, "")))

    def summarize(self, req: SummarizeRequest) -> SummaryOutput:
        start = time.monotonic()
        text, truncated = truncate_to_budget(req.text, self.config.context_budget_tokens)
        prompt = render_prompt(self.templates[req.task], text)
        url = self.config.endpoint.rstrip("/") + "/v1/completions"
        headers = {}
        if self.config.auth_token:
            headers["Authorization"] = f"Bearer {self.config.auth_token}"
        body = {
            "model": self.config.model,
            "prompt": prompt,
            "max_tokens": req.max_summary_tokens,
        }
        last_error: str = ""
        for attempt in range(self.config.retries + 1):
            if attempt:
                time.sleep(self.config.backoff_base * (2 ** (attempt - 1)))
            try:
                resp = requests.post(url, json=body, headers=headers, timeout=self.config.timeout)
            except requests.RequestException as exc:
                last_error = str(exc)
                continue
            if resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(f"{url}: HTTP {resp.status_code}")
            completion = str(resp.json().get("text", "")).strip()
            if not completion:
                raise DegenerateOutput(f"{url}: empty completion")
            return SummaryOutput(
                summary=completion,
                backend_id=self.backend_id,
                task=req.task,
                truncated_input=truncated,
                latency=time.monotonic() - start,
            )
        raise BackendUnavailable(f"{url}: {last_error} after {self.config.retries + 1} attempts")

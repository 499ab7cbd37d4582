"""The four evaluation metrics: BLEU, ROUGE-L, BERTScore-style matching, and
mean-embedding cosine similarity, over one shared tokenizer.

Derivations used by the tests:
  * bleu([the,cat,sat], [the,cat,sat,down], N=4): the candidate has 3 tokens
    so the effective order drops to 3 with uniform weights 1/3 each; every
    1/2/3-gram of the candidate appears in the reference, so p1=p2=p3=1 and
    the geometric mean is 1. c=3 <= r=4, so BP = exp(1 - 4/3) = exp(-1/3),
    and the score is exp(-1/3) ~= 0.716531.
  * rouge_l([the,cat,sat], [the,cat,on,the,mat,sat], beta=1): LCS = 3
    (the,cat,sat), P = 3/3 = 1, R = 3/6 = 0.5, F1 = 2PR/(P+R) = 2/3.
  * bert-style score of [fever] vs [fever,cough] under a provider mapping the
    two words to orthogonal unit vectors: precision = 1 (fever matches
    itself), recall = (1 + 0)/2 = 0.5, F1 = 2*1*0.5/1.5 = 2/3.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ScoringError(Exception):
    """Embedding provider failed while scoring; names the offending text."""

    def __init__(self, text: str, cause: Exception):
        preview = text if len(text) <= 60 else text[:57] + "..."
        super().__init__(f"embedding failed for {preview!r}: {cause}")
        self.text = text
        self.cause = cause


@dataclass(frozen=True)
class BleuParams:
    max_order: int = 4
    weights: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)
    epsilon: float = 1e-9

    def __post_init__(self):
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        if len(self.weights) != self.max_order:
            raise ValueError("need one weight per order")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


@dataclass(frozen=True)
class BleuBreakdown:
    precisions: tuple[float, ...]
    brevity_penalty: float
    candidate_len: int
    reference_len: int
    score: float
    degenerate: bool = False


@dataclass(frozen=True)
class RougeLBreakdown:
    lcs_len: int
    precision: float
    recall: float
    beta: float
    score: float


@dataclass(frozen=True)
class BertScoreBreakdown:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricReport:
    bleu: BleuBreakdown
    rouge_l: RougeLBreakdown
    bert: BertScoreBreakdown
    spacy_sim: float


_PUNCT = set(".,;:!?()\"'[]")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, peel leading/trailing punctuation off
    each word into tokens of their own. Internal punctuation stays attached."""
    tokens: list[str] = []
    for word in text.lower().split():
        head: list[str] = []
        while word and word[0] in _PUNCT:
            head.append(word[0])
            word = word[1:]
        tail: list[str] = []
        while word and word[-1] in _PUNCT:
            tail.append(word[-1])
            word = word[:-1]
        tokens.extend(head)
        if word:
            tokens.append(word)
        tokens.extend(reversed(tail))
    return tokens


def ngram_counts(seq: Sequence[str], n: int) -> Counter:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


def bleu(
    candidate: Sequence[str],
    reference: Sequence[str],
    params: BleuParams = BleuParams(),
) -> BleuBreakdown:
    """Sentence BLEU with clipped modified precision and Eq.-style brevity
    penalty: BP = 1 when c > r, else exp(1 - r/c).

    When the candidate is shorter than max_order, the order is reduced to the
    candidate length and the weights become uniform over that reduced order.
    Zero precisions are floored at params.epsilon before the log.
    """
    c, r = len(candidate), len(reference)
    if c == 0:
        return BleuBreakdown((), 0.0, 0, r, 0.0, degenerate=True)

    order = min(params.max_order, c)
    if order == params.max_order:
        weights = params.weights
    else:
        weights = tuple(1.0 / order for _ in range(order))

    precisions = []
    for n in range(1, order + 1):
        cand_counts = ngram_counts(candidate, n)
        ref_counts = ngram_counts(reference, n)
        clipped = sum(min(count, ref_counts[g]) for g, count in cand_counts.items())
        total = sum(cand_counts.values())
        precisions.append(clipped / total if total else 0.0)

    log_sum = sum(
        w * math.log(p if p > 0 else params.epsilon)
        for w, p in zip(weights, precisions)
    )
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return BleuBreakdown(
        precisions=tuple(precisions),
        brevity_penalty=bp,
        candidate_len=c,
        reference_len=r,
        score=bp * math.exp(log_sum),
    )


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(len(a)*len(b)) time, one-row DP."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, 1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(
    candidate: Sequence[str], reference: Sequence[str], beta: float = 1.0
) -> RougeLBreakdown:
    if beta <= 0:
        raise ValueError("beta must be > 0")
    lcs = lcs_length(candidate, reference) if candidate and reference else 0
    if lcs == 0:
        return RougeLBreakdown(0, 0.0, 0.0, beta, 0.0)
    p = lcs / len(candidate)
    r = lcs / len(reference)
    f = (1 + beta**2) * p * r / (p + beta**2 * r)
    return RougeLBreakdown(lcs, p, r, beta, f)


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def bert_score(
    candidate: Sequence[str], reference: Sequence[str], provider
) -> BertScoreBreakdown:
    """Greedy max-cosine token matching: each candidate token matches its best
    reference token (precision) and vice versa (recall). No idf weighting."""
    if not candidate or not reference:
        return BertScoreBreakdown(0.0, 0.0, 0.0)
    cand_vecs = np.asarray(provider.embed_tokens(list(candidate)), dtype=float)
    ref_vecs = np.asarray(provider.embed_tokens(list(reference)), dtype=float)
    sims = np.zeros((len(candidate), len(reference)))
    for i, cv in enumerate(cand_vecs):
        for j, rv in enumerate(ref_vecs):
            sims[i, j] = cosine(cv, rv)
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom else 0.0
    return BertScoreBreakdown(precision, recall, f1)


def sentence_embedding(text: str, provider) -> np.ndarray:
    """Mean of the token vectors of tokenize(text); zero vector when empty."""
    tokens = tokenize(text)
    if not tokens:
        return np.zeros(provider.dim)
    vectors = np.asarray(provider.embed_tokens(tokens), dtype=float)
    return vectors.mean(axis=0)


def score_pair(
    candidate: str,
    reference: str,
    provider,
    params: BleuParams = BleuParams(),
    beta: float = 1.0,
) -> MetricReport:
    """All four metrics for one candidate/reference pair."""
    cand_tokens = tokenize(candidate)
    ref_tokens = tokenize(reference)
    try:
        bert = bert_score(cand_tokens, ref_tokens, provider)
        sim = cosine(
            sentence_embedding(candidate, provider),
            sentence_embedding(reference, provider),
        )
    except ScoringError:
        raise
    except Exception as exc:
        raise ScoringError(candidate, exc) from exc
    return MetricReport(
        bleu=bleu(cand_tokens, ref_tokens, params),
        rouge_l=rouge_l(cand_tokens, ref_tokens, beta),
        bert=bert,
        spacy_sim=sim,
    )

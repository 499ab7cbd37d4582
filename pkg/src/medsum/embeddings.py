"""Embedding providers behind the semantic metrics.

Two providers share one contract (``dim``, ``embed_tokens``, ``embed_texts``):

* DeterministicProvider — offline, seeded. Each token maps to a unit vector
  drawn from a Philox counter-based generator keyed by (seed, blake2b(token)),
  so vectors are identical across processes and platforms.
* RemoteProvider — a minimal HTTP JSON contract, POST {endpoint}/embed.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import requests

from .metrics import tokenize

ENV_EMBED_URL = "MEDSUM_EMBED_URL"
ENV_EMBED_KEY = "MEDSUM_EMBED_KEY"


class ProviderError(Exception):
    """Remote embedding call failed; no partial results were produced."""

    def __init__(self, endpoint: str, batch_index: int, message: str):
        super().__init__(f"{endpoint} (batch {batch_index}): {message}")
        self.endpoint = endpoint
        self.batch_index = batch_index


def _token_key(seed: int, token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") ^ (seed & 0xFFFFFFFFFFFFFFFF)


class DeterministicProvider:
    """Seeded pseudo-random unit vectors, one per distinct token string."""

    def __init__(self, dim: int = 64, seed: int = 0):
        if dim < 8:
            raise ValueError("dim must be >= 8")
        self.dim = dim
        self.seed = seed
        self._memo: dict[str, np.ndarray] = {}

    def _vector(self, token: str) -> np.ndarray:
        vec = self._memo.get(token)
        if vec is None:
            rng = np.random.Generator(
                np.random.Philox(key=[self.seed & 0xFFFFFFFFFFFFFFFF,
                                      _token_key(self.seed, token)])
            )
            raw = rng.standard_normal(self.dim)
            vec = raw / np.linalg.norm(raw)
            self._memo[token] = vec
        return vec

    def embed_tokens(self, tokens: Sequence[str]) -> list[np.ndarray]:
        return [self._vector(t) for t in tokens]

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            tokens = tokenize(text)
            if tokens:
                out.append(np.mean(self.embed_tokens(tokens), axis=0))
            else:
                out.append(np.zeros(self.dim))
        return out


@dataclass
class RemoteConfig:
    endpoint: str
    auth_token: str = ""
    timeout: float = 30.0
    native_text_vectors: bool = False

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")


class RemoteProvider:
    """Batched HTTP embedding client for the POST {endpoint}/embed contract."""

    def __init__(self, config: RemoteConfig):
        self.config = config
        self.dim: int | None = None

    @classmethod
    def from_env(cls) -> "RemoteProvider":
        url = os.environ.get(ENV_EMBED_URL)
        if not url:
            raise ValueError(f"{ENV_EMBED_URL} is not set")
        return cls(RemoteConfig(endpoint=url, auth_token=os.environ.get(ENV_EMBED_KEY, "")))

    def _post(self, texts: list[str], batch_index: int) -> list[np.ndarray]:
        url = self.config.endpoint.rstrip("/") + "/embed"
        headers = {}
        if self.config.auth_token:
            headers["Authorization"] = f"Bearer {self.config.auth_token}"
        try:
            resp = requests.post(
                url, json={"texts": texts}, headers=headers, timeout=self.config.timeout
            )
        except requests.RequestException as exc:
            raise ProviderError(url, batch_index, str(exc)) from exc
        if resp.status_code != 200:
            raise ProviderError(url, batch_index, f"HTTP {resp.status_code}")
        body = resp.json()
        vectors = body.get("vectors")
        dim = body.get("dim")
        if vectors is None or dim is None:
            raise ProviderError(url, batch_index, "response missing vectors/dim")
        if self.dim is None:
            self.dim = int(dim)
        elif self.dim != int(dim):
            raise ProviderError(url, batch_index, f"dim changed: {self.dim} -> {dim}")
        out = [np.asarray(v, dtype=float) for v in vectors]
        if any(v.shape != (self.dim,) for v in out) or len(out) != len(texts):
            raise ProviderError(url, batch_index, "vector shape mismatch")
        return out

    def embed_tokens(self, tokens: Sequence[str]) -> list[np.ndarray]:
        if not tokens:
            return []
        return self._post(list(tokens), 0)

    def embed_texts(self, texts: Sequence[str]) -> list[np.ndarray]:
        if not texts:
            return []
        if self.config.native_text_vectors:
            return self._post(list(texts), 0)
        out = []
        for i, text in enumerate(texts):
            tokens = tokenize(text)
            if not tokens:
                if self.dim is None:
                    raise ProviderError(
                        self.config.endpoint, i, "cannot embed empty text before dim is known"
                    )
                out.append(np.zeros(self.dim))
            else:
                out.append(np.mean(self._post(tokens, i), axis=0))
        return out

"""Toy dialogue responder: interpolated n-gram LMs, top-K sampling, MMI reranking.

A dialogue is flattened into one token stream, utterances joined by ``<sep>``
and closed by ``<eos>``. The forward model scores P(response | context); the
reverse model is trained on role-swapped (response, context) pairs so that it
scores P(context | response) directly, which is what the reranker needs.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ptdialog.corpus import Corpus, Dialogue
from ptdialog.text import EOS, RESERVED, SEP, UNK, tokenize

LM_FORMAT = "ptdialog.ngram-lm"
LM_VERSION = 1


@dataclass(frozen=True)
class DialoguePair:
    context: tuple[str, ...]
    response: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "response", tuple(self.response))
        if self.context and self.context[-1] != SEP:
            raise ValueError("context must end with <sep>")
        if not self.response or self.response[-1] != EOS:
            raise ValueError("response must be non-empty and end with <eos>")


def context_tokens(utterances: Sequence[str]) -> tuple[str, ...]:
    out: list[str] = []
    for u in utterances:
        out.extend(tokenize(u))
        out.append(SEP)
    return tuple(out)


def response_tokens(text: str) -> tuple[str, ...]:
    return (*tokenize(text), EOS)


def core_tokens(tokens: Sequence[str]) -> tuple[str, ...]:
    """The first non-empty utterance segment of a generated token stream."""
    out: list[str] = []
    for t in tokens:
        if t == EOS or (t == SEP and out):
            break
        if t != SEP:
            out.append(t)
    return tuple(out)


def swap_roles(context: Sequence[str], candidate: Sequence[str]) -> DialoguePair:
    """Pair whose context is the candidate and whose response is the original context."""
    ctx = list(context)
    while ctx and ctx[-1] == SEP:
        ctx.pop()
    return DialoguePair((*core_tokens(candidate), SEP), (*ctx, EOS))


@dataclass
class NGramLM:
    order: int
    vocabulary: tuple[str, ...]
    counts: list[dict[tuple[str, ...], Counter]] = field(default_factory=list)
    interpolation_weights: tuple[float, ...] = ()
    additive_alpha: float = 0.1

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.additive_alpha <= 0:
            raise ValueError("additive_alpha must be > 0")
        self.vocabulary = tuple(sorted(set(self.vocabulary)))
        if not self.counts:
            self.counts = [{} for _ in range(self.order)]
        if not self.interpolation_weights:
            self.interpolation_weights = (1.0 / self.order,) * self.order
        self.interpolation_weights = tuple(float(w) for w in self.interpolation_weights)
        if len(self.counts) != self.order or len(self.interpolation_weights) != self.order:
            raise ValueError("need one count table and one interpolation weight per order")
        if abs(sum(self.interpolation_weights) - 1.0) > 1e-9 or min(self.interpolation_weights) < 0:
            raise ValueError("interpolation weights must be non-negative and sum to 1")
        self._index = {t: i for i, t in enumerate(self.vocabulary)}
        self._cache: dict[tuple[str, ...], np.ndarray] = {}

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    def index(self, token: str) -> int:
        return self._index[self.normalize_token(token)]

    def normalize_token(self, token: str) -> str:
        return token if token in self._index else UNK

    def _context(self, history: Sequence[str], m: int) -> tuple[str, ...]:
        if m == 1:
            return ()
        return tuple(self.normalize_token(t) for t in history[max(0, len(history) - (m - 1)):])

    def next_token_distribution(self, history: Sequence[str]) -> np.ndarray:
        """P(next | history) over ``vocabulary``, interpolating all orders."""
        key = self._context(history, self.order)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        V = self.vocab_size
        alpha = self.additive_alpha
        dist = np.zeros(V)
        for m in range(1, self.order + 1):
            ctx = key[max(0, len(key) - (m - 1)):] if m > 1 else ()
            table = self.counts[m - 1].get(ctx)
            vec = np.full(V, alpha)
            total = 0
            if table:
                for tok, c in table.items():
                    vec[self._index[tok]] += c
                    total += c
            dist += self.interpolation_weights[m - 1] * vec / (total + alpha * V)
        dist.setflags(write=False)
        self._cache[key] = dist
        return dist

    def prob(self, token: str, history: Sequence[str]) -> float:
        return float(self.next_token_distribution(history)[self.index(token)])

    # -- persistence
    def to_dict(self, direction: str = "forward") -> dict:
        tables = []
        for table in self.counts:
            rows = [[list(ctx), dict(sorted(c.items()))] for ctx, c in sorted(table.items())]
            tables.append(rows)
        return {
            "format": LM_FORMAT,
            "version": LM_VERSION,
            "direction": direction,
            "order": self.order,
            "additive_alpha": self.additive_alpha,
            "interpolation_weights": list(self.interpolation_weights),
            "vocabulary": list(self.vocabulary),
            "counts": tables,
        }

    def save(self, path, direction: str = "forward") -> None:
        Path(path).write_text(json.dumps(self.to_dict(direction), ensure_ascii=False) + "\n",
                              encoding="utf-8")

    @classmethod
    def from_dict(cls, obj: dict) -> "NGramLM":
        if obj.get("format") != LM_FORMAT:
            raise ValueError(f"not an n-gram model artifact (format={obj.get('format')!r})")
        if obj.get("version") != LM_VERSION:
            raise ValueError(f"n-gram model version {obj.get('version')!r} unsupported (expected {LM_VERSION})")
        counts = [{tuple(ctx): Counter(c) for ctx, c in table} for table in obj["counts"]]
        return cls(obj["order"], tuple(obj["vocabulary"]), counts,
                   tuple(obj["interpolation_weights"]), obj["additive_alpha"])

    @classmethod
    def load(cls, path) -> "NGramLM":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def forward_sequence(dialogue: Dialogue) -> list[str]:
    seq: list[str] = []
    for i, u in enumerate(dialogue.utterances):
        seq.extend(tokenize(u.text))
        seq.append(EOS if i == len(dialogue.utterances) - 1 else SEP)
    return seq


def reverse_sequences(dialogue: Dialogue) -> list[list[str]]:
    """One role-swapped stream per (context, response) split of the dialogue."""
    out = []
    texts = [u.text for u in dialogue.utterances]
    for k in range(1, len(texts)):
        ctx = context_tokens(texts[:k])
        pair = swap_roles(ctx, response_tokens(texts[k]))
        out.append([*pair.context, *pair.response])
    return out


def count_ngrams(sequences, order: int) -> list[dict[tuple[str, ...], Counter]]:
    tables: list[dict[tuple[str, ...], Counter]] = [{} for _ in range(order)]
    for seq in sequences:
        for i, tok in enumerate(seq):
            for m in range(1, order + 1):
                ctx = tuple(seq[max(0, i - (m - 1)):i]) if m > 1 else ()
                tables[m - 1].setdefault(ctx, Counter())[tok] += 1
    return tables


def train_lm(corpus: Corpus, direction: str = "forward", order: int = 3,
             additive_alpha: float = 0.1, interpolation_weights=None) -> NGramLM:
    if len(corpus) == 0:
        raise ValueError("cannot train a language model on an empty corpus")
    if direction == "forward":
        sequences = [forward_sequence(d) for d in corpus.dialogues]
    elif direction == "reverse":
        sequences = [s for d in corpus.dialogues for s in reverse_sequences(d)]
    else:
        raise ValueError(f"direction must be 'forward' or 'reverse', got {direction!r}")
    vocab = {t for s in sequences for t in s} | set(RESERVED)
    return NGramLM(order, tuple(vocab), count_ngrams(sequences, order),
                   tuple(interpolation_weights or ()), additive_alpha)


def log_prob_tokens(lm: NGramLM, context: Sequence[str], response: Sequence[str]) -> float:
    """Sum of log p(token | preceding tokens) over ``response`` only."""
    history = list(context)
    total = 0.0
    for tok in response:
        total += math.log(lm.prob(tok, history))
        history.append(tok)
    return total


def sequence_log_prob(lm: NGramLM, pair: DialoguePair) -> float:
    return log_prob_tokens(lm, pair.context, pair.response)


@dataclass(frozen=True)
class GenerationConfig:
    top_k: int = 10
    n_candidates: int = 10
    max_length: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.top_k < 1 or self.n_candidates < 1 or self.max_length < 1:
            raise ValueError("top_k, n_candidates and max_length must all be >= 1")


def top_k_indices(dist: np.ndarray, k: int) -> np.ndarray:
    # stable sort: equal probabilities resolved by vocabulary order
    return np.argsort(-dist, kind="stable")[:k]


def sample_top_k(lm: NGramLM, context: Sequence[str], config: GenerationConfig) -> tuple[str, ...]:
    if config.top_k > lm.vocab_size:
        raise ValueError(f"top_k={config.top_k} exceeds vocabulary size {lm.vocab_size}")
    rng = np.random.default_rng(config.seed)
    history = list(context)
    out: list[str] = []
    for _ in range(config.max_length):
        dist = lm.next_token_distribution(history)
        top = top_k_indices(dist, config.top_k)
        q = dist[top] / dist[top].sum()
        tok = lm.vocabulary[int(top[rng.choice(len(top), p=q)])]
        out.append(tok)
        history.append(tok)
        if tok == EOS:
            break
    return tuple(out)


def greedy_decode(lm: NGramLM, context: Sequence[str], max_length: int) -> tuple[str, ...]:
    history = list(context)
    out: list[str] = []
    for _ in range(max_length):
        tok = lm.vocabulary[int(np.argmax(lm.next_token_distribution(history)))]
        out.append(tok)
        history.append(tok)
        if tok == EOS:
            break
    return tuple(out)


def reverse_score(reverse: NGramLM, context: Sequence[str], candidate: Sequence[str]) -> float:
    """log P(context | candidate) under the reverse model."""
    return sequence_log_prob(reverse, swap_roles(context, candidate))


def mmi_rerank(forward: NGramLM, reverse: NGramLM, context: Sequence[str],
               candidates: Sequence[Sequence[str]]) -> list[tuple[tuple[str, ...], float]]:
    """Sort candidates by reverse score, best first; ties keep input order.

    ``forward`` is accepted for interface symmetry; only the reverse model scores.
    """
    if not candidates:
        raise ValueError("mmi_rerank needs at least one candidate")
    scored = [(tuple(c), reverse_score(reverse, context, c)) for c in candidates]
    return sorted(scored, key=lambda cs: -cs[1])


def draw_candidates(forward: NGramLM, context: Sequence[str], config: GenerationConfig):
    return [sample_top_k(forward, context, replace(config, seed=config.seed + i))
            for i in range(config.n_candidates)]


def generate_ranked(forward: NGramLM, reverse: NGramLM, context: Sequence[str],
                    config: GenerationConfig):
    return mmi_rerank(forward, reverse, context, draw_candidates(forward, context, config))


def generate(forward: NGramLM, reverse: NGramLM, context: Sequence[str],
             config: GenerationConfig) -> tuple[str, ...]:
    return generate_ranked(forward, reverse, context, config)[0][0]


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(core_tokens(tokens))

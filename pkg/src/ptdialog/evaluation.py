"""Automatic metrics: classification report, sentence BLEU, fluency, context."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ptdialog.corpus import Corpus, Sentiment
from ptdialog.responder import NGramLM, log_prob_tokens
from ptdialog.text import tokenize

METRICS = ("context", "fluency", "bleu")
HIST_BINS = 20


# -- classification ------------------------------------------------------------


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassificationReport:
    per_class: dict[Sentiment, ClassMetrics]
    accuracy: float

    def to_text(self) -> str:
        lines = [f"{'sentiment':<10} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}"]
        for s, m in self.per_class.items():
            lines.append(f"{str(s):<10} {m.precision:>9.4f} {m.recall:>9.4f} {m.f1:>9.4f} {m.support:>9d}")
        total = sum(m.support for m in self.per_class.values())
        lines.append(f"{'accuracy':<10} {'':>9} {'':>9} {self.accuracy:>9.4f} {total:>9d}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sentiment", "precision", "recall", "f1-score", "support"])
        for s, m in self.per_class.items():
            w.writerow([str(s), f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f1:.6f}", m.support])
        w.writerow(["accuracy", "", "", f"{self.accuracy:.6f}",
                    sum(m.support for m in self.per_class.values())])
        return buf.getvalue()


def classification_metrics(gold: Sequence[Sentiment], predicted: Sequence[Sentiment]) -> ClassificationReport:
    if len(gold) != len(predicted):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(predicted)} predicted")
    if not gold:
        raise ValueError("no examples to score")
    per_class = {}
    for s in Sentiment:
        tp = sum(1 for g, p in zip(gold, predicted) if g == s and p == s)
        n_pred = sum(1 for p in predicted if p == s)
        n_gold = sum(1 for g in gold if g == s)
        precision = tp / n_pred if n_pred else 0.0
        recall = tp / n_gold if n_gold else 0.0
        per_class[s] = ClassMetrics(precision, recall, f1_score(precision, recall), n_gold)
    accuracy = sum(1 for g, p in zip(gold, predicted) if g == p) / len(gold)
    return ClassificationReport(per_class, accuracy)


# -- BLEU ----------------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def modified_precisions(hypothesis: Sequence[str], reference: Sequence[str], max_n: int = 4):
    """(clipped matches, hypothesis n-gram total) for n = 1..max_n."""
    out = []
    for n in range(1, max_n + 1):
        hyp, ref = _ngrams(hypothesis, n), _ngrams(reference, n)
        matches = sum(min(c, ref[g]) for g, c in hyp.items())
        out.append((matches, sum(hyp.values())))
    return out


def bleu(hypothesis: Sequence[str], reference: Sequence[str]) -> float:
    """Smoothed sentence BLEU-4.

    An order with zero matches gets add-one precision ``1 / (total + 1)``;
    the unigram order is left unsmoothed, so no shared token means 0.
    """
    if not reference:
        raise ValueError("reference must be non-empty")
    if not hypothesis:
        return 0.0
    log_p = 0.0
    for n, (matches, total) in enumerate(modified_precisions(hypothesis, reference), 1):
        if matches == 0:
            if n == 1:
                return 0.0
            p = 1.0 / (total + 1)
        else:
            p = matches / total
        log_p += math.log(p) / 4
    bp = math.exp(min(0.0, 1.0 - len(reference) / len(hypothesis)))
    return bp * math.exp(log_p)


# -- fluency -------------------------------------------------------------------------


def fluency(response: Sequence[str], lm: NGramLM) -> float:
    """Inverse perplexity: the geometric-mean token probability of ``response``."""
    if not response:
        raise ValueError("cannot score fluency of an empty response")
    return math.exp(log_prob_tokens(lm, (), response) / len(response))


# -- context -------------------------------------------------------------------------


@dataclass(frozen=True)
class IdfTable:
    n_documents: int
    document_frequency: Mapping[str, int]

    def idf(self, token: str) -> float:
        # smoothed so terms unseen in the background keep a positive weight
        df = self.document_frequency.get(token, 0)
        return math.log((1 + self.n_documents) / (1 + df)) + 1.0

    def vector(self, text: str) -> dict[str, float]:
        tf = Counter(tokenize(text))
        return {t: c * self.idf(t) for t, c in tf.items()}


def build_idf(background: Corpus) -> IdfTable:
    df: Counter = Counter()
    n = 0
    for u in background.utterances():
        n += 1
        df.update(set(tokenize(u.text)))
    if n == 0:
        raise ValueError("background corpus is empty")
    return IdfTable(n, dict(df))


def cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    dot = sum(v * b.get(k, 0.0) for k, v in a.items())
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    if na == 0 or nb == 0:
        return 0.0
    return min(1.0, max(0.0, dot / (na * nb)))


def context_score(query: str, response: str, background) -> float:
    """TF-IDF cosine between query and response, IDF taken from ``background``."""
    idf = background if isinstance(background, IdfTable) else build_idf(background)
    return cosine(idf.vector(query), idf.vector(response))


# -- aggregate report --------------------------------------------------------------


@dataclass
class MetricReport:
    ids: list[str]
    values: dict[str, list[float]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.ids)

    def average(self, metric: str) -> float:
        return float(np.mean(self.values[metric]))

    def median(self, metric: str) -> float:
        return float(np.median(self.values[metric]))

    def aggregates(self) -> dict[str, dict[str, float]]:
        return {m: {"average": self.average(m), "median": self.median(m)} for m in METRICS}

    def histogram(self, metric: str, bins: int = HIST_BINS):
        counts, edges = np.histogram(self.values[metric], bins=bins, range=(0.0, 1.0))
        return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]

    def per_example_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", *METRICS])
        for i, ex_id in enumerate(self.ids):
            w.writerow([ex_id, *(f"{self.values[m][i]:.6f}" for m in METRICS)])
        return buf.getvalue()

    def aggregate_json(self) -> str:
        agg = {m: {k: round(v, 6) for k, v in a.items()} for m, a in self.aggregates().items()}
        agg["n_examples"] = len(self)
        agg["definitions"] = {
            "context": "stand-in: tf-idf cosine(query, response), idf over background utterances",
            "fluency": "stand-in: 1 / perplexity of the response under the reference n-gram model",
            "bleu": "smoothed sentence BLEU-4 against the reference response",
        }
        return json.dumps(agg, indent=2, sort_keys=True) + "\n"

    def histogram_csv(self, bins: int = HIST_BINS) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "bin_low", "bin_high", "count"])
        for m in METRICS:
            for lo, hi, c in self.histogram(m, bins):
                w.writerow([m, f"{lo:.2f}", f"{hi:.2f}", c])
        return buf.getvalue()


def evaluate_responses(pairs: Sequence[Mapping[str, str]], lm: NGramLM, background) -> MetricReport:
    """Score ``{query, response, reference}`` records (an ``id`` key is optional)."""
    if not pairs:
        raise ValueError("no responses to evaluate")
    idf = background if isinstance(background, IdfTable) else build_idf(background)
    report = MetricReport([str(p.get("id", i)) for i, p in enumerate(pairs)],
                          {m: [] for m in METRICS})
    for p in pairs:
        resp = tokenize(p["response"])
        report.values["context"].append(context_score(p["query"], p["response"], idf))
        report.values["fluency"].append(fluency(resp, lm))
        report.values["bleu"].append(bleu(resp, tokenize(p["reference"])))
    return report

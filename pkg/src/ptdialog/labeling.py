"""Sentiment voters and their agreement fusion.

Two independent voters label each utterance: a bag-of-words multinomial
logistic regression trained on thresholded review scores, and an
emoji lookup table. An utterance keeps a fused label only when both agree.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ptdialog.corpus import Corpus, Dialogue, Sentiment, Utterance
from ptdialog.emojis import extract_emojis, strip_emojis
from ptdialog.text import tokenize

N_CLASSES = len(Sentiment)
MODEL_FORMAT = "ptdialog.sp-model"
MODEL_VERSION = 1


# -- review data ----------------------------------------------------------------


@dataclass(frozen=True)
class ReviewRecord:
    text: str
    score: int

    def __post_init__(self):
        if not isinstance(self.score, int) or not 1 <= self.score <= 5:
            raise ValueError(f"review score must be an integer in [1, 5], got {self.score!r}")

    @property
    def label(self) -> Sentiment:
        return score_to_label(self.score)


def score_to_label(score: int) -> Sentiment:
    if isinstance(score, bool) or not isinstance(score, int) or not 1 <= score <= 5:
        raise ValueError(f"review score must be an integer in [1, 5], got {score!r}")
    if score <= 2:
        return Sentiment.NEGATIVE
    if score >= 4:
        return Sentiment.POSITIVE
    return Sentiment.NEUTRAL


def read_reviews(path) -> list[ReviewRecord]:
    """Read a ``text,score`` CSV file."""
    path = Path(path)
    out = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"text", "score"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns text,score")
        for row_no, row in enumerate(reader, 2):
            try:
                out.append(ReviewRecord(row["text"], int(row["score"])))
            except (TypeError, ValueError) as e:
                raise ValueError(f"{path}: row {row_no}: {e}") from None
    return out


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.9
    valid_fraction: float = 0.05
    test_fraction: float = 0.05
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_fraction, self.valid_fraction, self.test_fraction)
        if any(not 0 < f < 1 for f in fracs):
            raise ValueError(f"split fractions must lie in (0, 1), got {fracs}")
        if abs(sum(fracs) - 1) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)!r}")


def split_sizes(n: int, spec: SplitSpec) -> tuple[int, int, int]:
    # floor the first two parts, test takes the remainder
    n_train = math.floor(n * spec.train_fraction + 1e-9)
    n_valid = math.floor(n * spec.valid_fraction + 1e-9)
    n_test = n - n_train - n_valid
    return n_train, n_valid, n_test


def split_reviews(records: Sequence, spec: SplitSpec):
    if len(records) < 3:
        raise ValueError("need at least 3 records to split")
    sizes = split_sizes(len(records), spec)
    if min(sizes) <= 0:
        raise ValueError(f"split of {len(records)} records into {sizes} leaves an empty part")
    order = np.random.default_rng(spec.seed).permutation(len(records))
    shuffled = [records[i] for i in order]
    a, b, _ = sizes
    return shuffled[:a], shuffled[a:a + b], shuffled[a + b:]


# -- linear sentiment predictor ----------------------------------------------------


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.5
    epochs: int = 10
    l2: float = 1e-4
    seed: int = 0
    min_token_freq: int = 2
    batch_size: int = 32


class TrainingDivergedError(FloatingPointError):
    pass


def featurize_tokens(text: str) -> list[str]:
    return tokenize(strip_emojis(text))


def build_vocabulary(texts, min_token_freq: int) -> dict[str, int]:
    freq = Counter(tok for t in texts for tok in featurize_tokens(t))
    kept = sorted(tok for tok, c in freq.items() if c >= min_token_freq)
    return {tok: i for i, tok in enumerate(kept)}


def feature_matrix(texts, vocabulary: dict[str, int]) -> np.ndarray:
    """Bag-of-words counts with a trailing constant-1 bias column."""
    X = np.zeros((len(texts), len(vocabulary) + 1))
    X[:, -1] = 1.0
    for row, text in enumerate(texts):
        for tok in featurize_tokens(text):
            idx = vocabulary.get(tok)
            if idx is not None:
                X[row, idx] += 1.0
    return X


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(W: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean cross-entropy plus ``l2/2 * ||W||^2`` (bias column unpenalized)."""
    n = X.shape[0]
    P = softmax(X @ W.T)
    nll = -np.log(np.clip(P[np.arange(n), y], 1e-300, None)).mean()
    Wr = W.copy()
    Wr[:, -1] = 0.0
    loss = nll + 0.5 * l2 * float((Wr * Wr).sum())
    P[np.arange(n), y] -= 1.0
    grad = P.T @ X / n + l2 * Wr
    return float(loss), grad


@dataclass
class LinearSentimentModel:
    vocabulary: dict[str, int]
    weights: np.ndarray
    training_config: TrainingConfig = field(default_factory=TrainingConfig)
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.weights.shape != (N_CLASSES, len(self.vocabulary) + 1):
            raise ValueError(
                f"weights shape {self.weights.shape} inconsistent with vocabulary size {len(self.vocabulary)}"
            )

    def probabilities(self, text: str) -> np.ndarray:
        x = feature_matrix([text], self.vocabulary)
        return softmax(x @ self.weights.T)[0]

    def predict(self, text: str) -> Sentiment:
        # np.argmax keeps the first maximum, i.e. the lowest sentiment on ties
        return Sentiment(int(np.argmax(self.probabilities(text))))

    def predict_many(self, texts) -> list[Sentiment]:
        if not texts:
            return []
        P = softmax(feature_matrix(list(texts), self.vocabulary) @ self.weights.T)
        return [Sentiment(int(i)) for i in np.argmax(P, axis=1)]

    def to_dict(self) -> dict:
        tokens = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "classes": [str(s) for s in Sentiment],
            "vocabulary": tokens,
            "weights": self.weights.tolist(),
            "training_config": asdict(self.training_config),
            "loss_history": list(self.loss_history),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, obj: dict) -> "LinearSentimentModel":
        if obj.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a sentiment model artifact (format={obj.get('format')!r})")
        if obj.get("version") != MODEL_VERSION:
            raise ValueError(
                f"sentiment model version {obj.get('version')!r} unsupported (expected {MODEL_VERSION})"
            )
        vocab = {tok: i for i, tok in enumerate(obj["vocabulary"])}
        return cls(
            vocab,
            np.asarray(obj["weights"], dtype=float),
            TrainingConfig(**obj["training_config"]),
            list(obj.get("loss_history", [])),
        )

    @classmethod
    def load(cls, path) -> "LinearSentimentModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _as_labeled(records) -> tuple[list[str], np.ndarray]:
    texts, labels = [], []
    for r in records:
        if isinstance(r, ReviewRecord):
            texts.append(r.text)
            labels.append(int(r.label))
        else:
            text, label = r
            texts.append(text)
            labels.append(int(Sentiment(label)))
    return texts, np.asarray(labels, dtype=int)


def _accuracy(W, X, y) -> float:
    if len(y) == 0:
        return 0.0
    return float((np.argmax(softmax(X @ W.T), axis=1) == y).mean())


def train_sp(train, valid, config: TrainingConfig = TrainingConfig()) -> LinearSentimentModel:
    """Fit the predictor by seeded mini-batch gradient descent.

    ``train``/``valid`` hold ``ReviewRecord`` objects or ``(text, Sentiment)``
    pairs. Returns the weights from the epoch with the best validation
    accuracy (earliest epoch wins ties); ``loss_history[0]`` is the loss
    before the first update and entry ``e`` the full-train loss after epoch ``e``.
    """
    texts, y = _as_labeled(train)
    if not texts:
        raise ValueError("training set is empty")
    missing = [str(s) for s in Sentiment if not (y == s).any()]
    if missing:
        raise ValueError(f"training data has no examples of class(es): {', '.join(missing)}")
    if config.batch_size < 1 or config.epochs < 0:
        raise ValueError("batch_size must be >= 1 and epochs >= 0")
    vocab = build_vocabulary(texts, config.min_token_freq)
    X = feature_matrix(texts, vocab)
    v_texts, v_y = _as_labeled(valid)
    Xv = feature_matrix(v_texts, vocab)

    rng = np.random.default_rng(config.seed)
    W = np.zeros((N_CLASSES, X.shape[1]))
    n = X.shape[0]
    history = [loss_and_grad(W, X, y, config.l2)[0]]
    best_W, best_acc = W.copy(), _accuracy(W, Xv, v_y)
    step = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                idx = order[start:start + config.batch_size]
                loss, grad = loss_and_grad(W, X[idx], y[idx], config.l2)
                step += 1
                if not math.isfinite(loss) or not np.isfinite(grad).all():
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch}, step {step} (learning_rate={config.learning_rate})"
                    )
                W = W - config.learning_rate * grad
            epoch_loss = loss_and_grad(W, X, y, config.l2)[0]
            if not math.isfinite(epoch_loss):
                raise TrainingDivergedError(f"non-finite loss after epoch {epoch}, step {step}")
            history.append(epoch_loss)
            acc = _accuracy(W, Xv, v_y)
            if acc > best_acc:
                best_W, best_acc = W.copy(), acc
    return LinearSentimentModel(vocab, best_W, config, history)


def predict_sp(model: LinearSentimentModel, text: str) -> Sentiment:
    return model.predict(text)


# -- emoji voter -------------------------------------------------------------------


@dataclass(frozen=True)
class EmojiSentimentTable:
    entries: dict[str, Sentiment]

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, emoji: str) -> Optional[Sentiment]:
        return self.entries.get(emoji)


def load_emoji_table(path) -> EmojiSentimentTable:
    """Read an ``emoji<TAB>label`` file; ``#`` lines and blank lines are skipped."""
    path = Path(path)
    entries: dict[str, Sentiment] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}: line {line_no}: expected 2 tab-separated columns")
        emoji, label = parts[0].strip(), parts[1].strip()
        try:
            sentiment = Sentiment.parse(label)
        except ValueError as e:
            raise ValueError(f"{path}: line {line_no}: {e}") from None
        if emoji in entries and entries[emoji] != sentiment:
            raise ValueError(f"{path}: line {line_no}: emoji {emoji!r} mapped to two sentiments")
        entries[emoji] = sentiment
    return EmojiSentimentTable(entries)


def save_emoji_table(table: EmojiSentimentTable, path) -> None:
    lines = [f"{e}\t{s}" for e, s in table.entries.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def label_by_emoji(table: EmojiSentimentTable, utterance: Utterance) -> Optional[Sentiment]:
    """Sentiment of the most frequent mapped emoji; ties go to the earliest one."""
    counts: Counter = Counter()
    first_seen: dict[str, int] = {}
    for pos, e in enumerate(utterance.emojis):
        if e in table.entries:
            counts[e] += 1
            first_seen.setdefault(e, pos)
    if not counts:
        return None
    best = min(counts, key=lambda e: (-counts[e], first_seen[e]))
    return table.entries[best]


# -- fusion ------------------------------------------------------------------------


def fuse_labels(utterance: Utterance) -> Utterance:
    if utterance.sp_label is None:
        raise ValueError("fuse_labels called before the sentiment predictor labeled the utterance")
    agree = utterance.emoji_label is not None and utterance.emoji_label == utterance.sp_label
    return utterance.with_labels(fused_label=utterance.sp_label if agree else None)


def label_corpus(corpus: Corpus, model: LinearSentimentModel,
                 table: EmojiSentimentTable) -> Corpus:
    dialogues = []
    for d in corpus.dialogues:
        sp = model.predict_many([u.text for u in d.utterances])
        utts = []
        for u, sp_label in zip(d.utterances, sp):
            u = u.with_labels(sp_label=sp_label, emoji_label=label_by_emoji(table, u), fused_label=None)
            utts.append(fuse_labels(u))
        dialogues.append(Dialogue(d.id, tuple(utts)))
    return Corpus(tuple(dialogues), corpus.provenance).annotate("labeled (predictor + emoji agreement)")

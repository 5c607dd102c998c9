"""Dialogue data model, JSONL ingestion/serialization and corpus statistics."""

from __future__ import annotations

import csv
import enum
import io
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from ptdialog.emojis import extract_emojis
from ptdialog.text import word_count


class Sentiment(enum.IntEnum):
    """Three-state sentiment, ordered negative < neutral < positive."""

    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: str) -> "Sentiment":
        for member in cls:
            if str(member) == value:
                return member
        raise ValueError(f"unknown sentiment label {value!r}")


class CorpusFormatError(ValueError):
    """A JSONL line could not be parsed into a dialogue record."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class CorpusValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Utterance:
    speaker: str
    text: str
    emojis: tuple[str, ...] = ()
    sp_label: Optional[Sentiment] = None
    emoji_label: Optional[Sentiment] = None
    fused_label: Optional[Sentiment] = None

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusValidationError("utterance text is empty")
        if self.fused_label is not None and not (
            self.sp_label is not None
            and self.emoji_label is not None
            and self.sp_label == self.emoji_label == self.fused_label
        ):
            raise CorpusValidationError(
                "fused_label requires sp_label and emoji_label to agree with it"
            )

    @classmethod
    def from_text(cls, speaker: str, text: str, **labels) -> "Utterance":
        return cls(speaker, text, tuple(extract_emojis(text)), **labels)

    def with_labels(self, **labels) -> "Utterance":
        return replace(self, **labels)


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple[Utterance, ...]

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if len(self.utterances) < 2:
            raise CorpusValidationError(
                f"dialogue {self.id!r} has {len(self.utterances)} utterance(s); at least 2 required"
            )

    def __len__(self) -> int:
        return len(self.utterances)

    @property
    def first_speaker(self) -> str:
        return self.utterances[0].speaker

    def fused_labels(self) -> list[Optional[Sentiment]]:
        return [u.fused_label for u in self.utterances]


@dataclass(frozen=True)
class Corpus:
    dialogues: tuple[Dialogue, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "dialogues", tuple(self.dialogues))
        seen = set()
        for d in self.dialogues:
            if d.id in seen:
                raise CorpusValidationError(f"duplicate dialogue id {d.id!r}")
            seen.add(d.id)

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self):
        return iter(self.dialogues)

    def utterances(self) -> Iterable[Utterance]:
        for d in self.dialogues:
            yield from d.utterances

    def annotate(self, note: str) -> "Corpus":
        prov = f"{self.provenance}; {note}" if self.provenance else note
        return Corpus(self.dialogues, prov)


# -- JSONL ------------------------------------------------------------------

_LABEL_KEYS = ("sp_label", "emoji_label", "fused_label")


def _parse_utterance(obj, line_no: int) -> Utterance:
    if not isinstance(obj, dict):
        raise CorpusFormatError("utterance must be an object", line_no)
    for key in ("speaker", "text"):
        if not isinstance(obj.get(key), str):
            raise CorpusFormatError(f"utterance field {key!r} missing or not a string", line_no)
    labels = {}
    for key in _LABEL_KEYS:
        value = obj.get(key)
        if value is None:
            continue
        if not isinstance(value, str):
            raise CorpusFormatError(f"{key} must be a string", line_no)
        try:
            labels[key] = Sentiment.parse(value)
        except ValueError as e:
            raise CorpusFormatError(str(e), line_no) from None
    try:
        return Utterance.from_text(obj["speaker"], obj["text"], **labels)
    except CorpusValidationError as e:
        raise CorpusFormatError(str(e), line_no) from None


def parse_dialogue(line: str, line_no: int) -> Dialogue:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusFormatError(f"invalid JSON ({e.msg})", line_no) from None
    if not isinstance(obj, dict):
        raise CorpusFormatError("record must be a JSON object", line_no)
    if not isinstance(obj.get("id"), str):
        raise CorpusFormatError("missing or non-string 'id' field", line_no)
    utts = obj.get("utterances")
    if not isinstance(utts, list):
        raise CorpusFormatError("missing or non-list 'utterances' field", line_no)
    utterances = [_parse_utterance(u, line_no) for u in utts]
    try:
        return Dialogue(obj["id"], tuple(utterances))
    except CorpusValidationError as e:
        raise CorpusValidationError(f"line {line_no}: {e}") from None


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def load_corpus(path, format: str = "jsonl") -> Corpus:
    """Read and validate a JSONL corpus, extracting emojis from every utterance.

    Provenance is read from the ``<path>.meta.json`` sidecar when present.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    path = Path(path)
    dialogues = []
    seen: dict[str, int] = {}
    try:
        fh = path.open(encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot read corpus {path}: {e.strerror or e}") from e
    with fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = parse_dialogue(line, line_no)
            except CorpusFormatError as e:
                raise CorpusFormatError(str(e).split(": ", 1)[-1], line_no, str(path)) from None
            if d.id in seen:
                raise CorpusValidationError(
                    f"{path}: line {line_no}: duplicate dialogue id {d.id!r} (first on line {seen[d.id]})"
                )
            seen[d.id] = line_no
            dialogues.append(d)
    provenance = ""
    meta = _meta_path(path)
    if meta.exists():
        provenance = json.loads(meta.read_text(encoding="utf-8")).get("provenance", "")
    return Corpus(tuple(dialogues), provenance)


def dialogue_to_dict(d: Dialogue) -> dict:
    utts = []
    for u in d.utterances:
        rec = {"speaker": u.speaker, "text": u.text}
        for key in _LABEL_KEYS:
            value = getattr(u, key)
            if value is not None:
                rec[key] = str(value)
        utts.append(rec)
    return {"id": d.id, "utterances": utts}


def save_corpus(corpus: Corpus, path) -> None:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for d in corpus.dialogues:
                fh.write(json.dumps(dialogue_to_dict(d), ensure_ascii=False) + "\n")
        meta = _meta_path(path)
        if corpus.provenance:
            meta.write_text(
                json.dumps({"provenance": corpus.provenance}, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
        elif meta.exists():
            meta.unlink()
    except OSError as e:
        raise OSError(f"cannot write corpus {path}: {e.strerror or e}") from e


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class CorpusStats:
    n_dialogues: int
    n_utterances: int
    avg_utterances_per_dialogue: float
    avg_words_per_utterance: float
    avg_words_per_dialogue: float
    label_distribution: dict = field(default_factory=dict)

    def as_rows(self) -> list[tuple[str, object]]:
        rows = [
            ("n_dialogues", self.n_dialogues),
            ("n_utterances", self.n_utterances),
            ("avg_utterances_per_dialogue", self.avg_utterances_per_dialogue),
            ("avg_words_per_utterance", self.avg_words_per_utterance),
            ("avg_words_per_dialogue", self.avg_words_per_dialogue),
        ]
        for key in ("negative", "neutral", "positive", "unlabeled"):
            rows.append((f"label_{key}", self.label_distribution.get(key, 0)))
        return rows

    def to_text(self) -> str:
        return "".join(f"{k}: {_fmt(v)}\n" for k, v in self.as_rows())


def _fmt(v) -> str:
    return f"{v:.4f}" if isinstance(v, float) else str(v)


def stats_from_counts(n_dialogues: int, n_utterances: int, n_words: int,
                      label_distribution: dict | None = None) -> CorpusStats:
    if n_dialogues <= 0:
        raise ValueError("statistics undefined for an empty corpus")
    if n_utterances <= 0:
        raise ValueError("statistics undefined without utterances")
    return CorpusStats(
        n_dialogues=n_dialogues,
        n_utterances=n_utterances,
        avg_utterances_per_dialogue=n_utterances / n_dialogues,
        avg_words_per_utterance=n_words / n_utterances,
        avg_words_per_dialogue=n_words / n_dialogues,
        label_distribution=dict(label_distribution or {}),
    )


def compute_stats(corpus: Corpus) -> CorpusStats:
    n_utt = n_words = 0
    labels: Counter = Counter({"negative": 0, "neutral": 0, "positive": 0, "unlabeled": 0})
    for u in corpus.utterances():
        n_utt += 1
        n_words += word_count(u.text)
        labels["unlabeled" if u.fused_label is None else str(u.fused_label)] += 1
    return stats_from_counts(len(corpus), n_utt, n_words, dict(labels))


def stats_csv(named: dict[str, CorpusStats]) -> str:
    """One column per corpus, one row per statistic (Table-5 layout)."""
    names = list(named)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["statistic", *names])
    rows = {name: dict(s.as_rows()) for name, s in named.items()}
    for key, _ in next(iter(named.values())).as_rows():
        w.writerow([key, *(_fmt(rows[n][key]) for n in names)])
    return buf.getvalue()

"""Positive-transition dialogue selection and sentiment transition statistics."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

from ptdialog.corpus import Corpus, Dialogue, Sentiment


class TrackedSpeaker(str, enum.Enum):
    FIRST_SPEAKER = "first_speaker"
    ALL_SPEAKERS = "all_speakers"


class PTMode(str, enum.Enum):
    ANY_INCREASE = "any_increase"
    MUST_REACH_POSITIVE = "must_reach_positive"


class Pairing(str, enum.Enum):
    CONSECUTIVE_UTTERANCES = "consecutive_utterances"
    SAME_SPEAKER_CONSECUTIVE = "same_speaker_consecutive"


@dataclass(frozen=True)
class PTConfig:
    tracked_speaker: TrackedSpeaker = TrackedSpeaker.FIRST_SPEAKER
    mode: PTMode = PTMode.ANY_INCREASE
    scope: str = "whole_dialogue"

    def __post_init__(self):
        object.__setattr__(self, "tracked_speaker", TrackedSpeaker(self.tracked_speaker))
        object.__setattr__(self, "mode", PTMode(self.mode))
        if self.scope != "whole_dialogue":
            raise ValueError(f"unsupported PT scope {self.scope!r}")


def tracked_labels(dialogue: Dialogue, tracked: TrackedSpeaker) -> list[Sentiment]:
    """Fused labels of the tracked speaker's utterances, unlabeled ones dropped."""
    speaker = dialogue.first_speaker
    return [
        u.fused_label
        for u in dialogue.utterances
        if u.fused_label is not None
        and (tracked is TrackedSpeaker.ALL_SPEAKERS or u.speaker == speaker)
    ]


def is_positive_transition(dialogue: Dialogue, config: PTConfig = PTConfig()) -> bool:
    labels = tracked_labels(dialogue, config.tracked_speaker)
    for prev, nxt in zip(labels, labels[1:]):
        if nxt > prev and (config.mode is PTMode.ANY_INCREASE or nxt is Sentiment.POSITIVE):
            return True
    return False


def extract_pt(corpus: Corpus, config: PTConfig = PTConfig()) -> Corpus:
    kept = tuple(d for d in corpus.dialogues if is_positive_transition(d, config))
    note = (
        f"PT-extracted (tracked={config.tracked_speaker.value}, mode={config.mode.value}): "
        f"{len(kept)}/{len(corpus)} dialogues"
    )
    return Corpus(kept, corpus.provenance).annotate(note)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (3, 3) or (counts < 0).any():
            raise ValueError("transition counts must be a non-negative 3x3 matrix")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def probabilities(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True)
        return np.divide(self.counts, rows, out=np.zeros((3, 3)), where=rows > 0)

    def probability(self, src: Sentiment, dst: Sentiment) -> float:
        return float(self.probabilities[src, dst])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, TransitionMatrix) and np.array_equal(self.counts, other.counts)

    def __add__(self, other: "TransitionMatrix") -> "TransitionMatrix":
        return TransitionMatrix(self.counts + other.counts)


def dialogue_pairs(dialogue: Dialogue, pairing: Pairing):
    """Yield (from, to) label pairs; an unlabeled member drops the pair."""
    utts = dialogue.utterances
    for i, u in enumerate(utts):
        if pairing is Pairing.CONSECUTIVE_UTTERANCES:
            nxt = utts[i + 1] if i + 1 < len(utts) else None
        else:
            nxt = next((v for v in utts[i + 1:] if v.speaker == u.speaker), None)
        if nxt is not None and u.fused_label is not None and nxt.fused_label is not None:
            yield u.fused_label, nxt.fused_label


def transition_matrix(corpus: Corpus,
                      pairing: Pairing = Pairing.CONSECUTIVE_UTTERANCES) -> TransitionMatrix:
    pairing = Pairing(pairing)
    counts = np.zeros((3, 3), dtype=np.int64)
    for d in corpus.dialogues:
        for a, b in dialogue_pairs(d, pairing):
            counts[a, b] += 1
    return TransitionMatrix(counts)


def render_transition_dot(matrix: TransitionMatrix, threshold: float = 0.1,
                          name: str = "transitions") -> str:
    """Graphviz source; edges above ``threshold`` are blue, the rest grey."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    probs = matrix.probabilities
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=ellipse];"]
    for s in Sentiment:
        lines.append(f'  {s} [label="{s}"];')
    for a in Sentiment:
        for b in Sentiment:
            p = float(probs[a, b])
            if p == 0.0:
                continue
            color = "blue" if p > threshold else "grey"
            lines.append(f'  {a} -> {b} [label="{p:.2f}", color="{color}", fontcolor="{color}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TransitionDelta:
    from_state: Sentiment
    before_p: float
    after_p: float

    @property
    def delta(self) -> float:
        return self.after_p - self.before_p


def compare_transitions(before: TransitionMatrix, after: TransitionMatrix) -> list[TransitionDelta]:
    """Change in P(state -> positive) for each from-state."""
    pos = Sentiment.POSITIVE
    return [TransitionDelta(s, before.probability(s, pos), after.probability(s, pos)) for s in Sentiment]


def comparison_csv(rows: list[TransitionDelta]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from_state", "before_p", "after_p", "delta"])
    for r in rows:
        w.writerow([str(r.from_state), f"{r.before_p:.6f}", f"{r.after_p:.6f}", f"{r.delta:.6f}"])
    return buf.getvalue()


def matrix_csv(matrix: TransitionMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from_state", "to_state", "count", "probability"])
    probs = matrix.probabilities
    for a in Sentiment:
        for b in Sentiment:
            w.writerow([str(a), str(b), int(matrix.counts[a, b]), f"{probs[a, b]:.6f}"])
    return buf.getvalue()

from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from ptdialog.corpus import Corpus, Dialogue, Sentiment, Utterance

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
GOLDEN = Path(__file__).parent / "golden"

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def labeled_utterance(speaker: str, text: str, label):
    """Utterance whose two voters agree on ``label`` (or carry no fused label)."""
    if label is None:
        return Utterance.from_text(speaker, text)
    return Utterance.from_text(speaker, text, sp_label=label, emoji_label=label, fused_label=label)


def dialogue_from_labels(did: str, labels, speakers=None) -> Dialogue:
    speakers = speakers or ["A" if i % 2 == 0 else "B" for i in range(len(labels))]
    return Dialogue(did, tuple(labeled_utterance(s, f"utt {i}", l)
                               for i, (s, l) in enumerate(zip(speakers, labels))))


def random_labeled_corpus(n: int, seed: int, p_unlabeled: float = 0.3) -> Corpus:
    rng = np.random.default_rng(seed)
    dialogues = []
    for i in range(n):
        length = int(rng.integers(2, 9))
        speakers = [str(rng.choice(["A", "B", "C"])) for _ in range(length)]
        labels = [None if rng.random() < p_unlabeled else Sentiment(int(rng.integers(3)))
                  for _ in range(length)]
        dialogues.append(dialogue_from_labels(f"d{i}", labels, speakers))
    return Corpus(tuple(dialogues))


# -- hypothesis strategies ------------------------------------------------------------

sentiments = st.sampled_from(list(Sentiment))
optional_sentiments = st.none() | sentiments
EMOJI_ALPHABET = ["\U0001F600", "\U0001F622", "❤️", "\U0001F44D\U0001F3FD",
                  "\U0001F468‍\U0001F469‍\U0001F467"]
words = st.sampled_from(["hi", "ok", "sad", "great", "the", "naïve", "日本", "x1"])
text_parts = st.lists(words | st.sampled_from(EMOJI_ALPHABET), min_size=1, max_size=6)


@st.composite
def utterances(draw):
    text = " ".join(draw(text_parts))
    sp = draw(optional_sentiments)
    emoji = draw(optional_sentiments)
    fused = sp if (sp is not None and sp == emoji and draw(st.booleans())) else None
    speaker = draw(st.sampled_from(["A", "B", "C"]))
    return Utterance.from_text(speaker, text, sp_label=sp, emoji_label=emoji, fused_label=fused)


@st.composite
def corpora(draw, max_dialogues=6):
    n = draw(st.integers(0, max_dialogues))
    dialogues = [Dialogue(f"dlg-{i}", tuple(draw(st.lists(utterances(), min_size=2, max_size=5))))
                 for i in range(n)]
    prov = draw(st.sampled_from(["", "unit test", "src → labeled"]))
    return Corpus(tuple(dialogues), prov)


@pytest.fixture
def tiny_corpus():
    return Corpus((
        Dialogue("a", (Utterance.from_text("A", "hello there"), Utterance.from_text("B", "hi you"),
                       Utterance.from_text("A", "bye now"))),
    ))

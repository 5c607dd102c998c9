"""Seeded generators for the bundled fixtures and for tests.

Utterance sentiments follow one of two Markov chains per dialogue: an
"uplifting" chain with high mass on moves into positive, and a "flat" chain
that mostly stays put. Text words and emojis are drawn from per-sentiment
pools with controlled noise so that the two voters disagree some of the time.
"""

from __future__ import annotations

import numpy as np

from ptdialog.corpus import Corpus, Dialogue, Sentiment, Utterance
from ptdialog.labeling import EmojiSentimentTable, ReviewRecord

WORDS = {
    Sentiment.NEGATIVE: [
        "terrible", "hate", "sad", "awful", "worst", "angry", "bad", "broken", "annoying",
        "horrible", "crash", "disappointed", "boring", "upset", "useless", "tired", "lonely",
    ],
    Sentiment.NEUTRAL: [
        "app", "update", "today", "phone", "version", "maybe", "game", "time", "use",
        "okay", "some", "still", "store", "screen", "week", "guess", "normal",
    ],
    Sentiment.POSITIVE: [
        "great", "love", "happy", "awesome", "amazing", "wonderful", "thanks", "glad", "best",
        "excellent", "perfect", "nice", "fun", "enjoy", "beautiful", "sweet", "proud",
    ],
}
FILLER = ["the", "i", "it", "is", "a", "this", "and", "my", "so", "was", "to", "really", "you", "we"]

EMOJIS = {
    Sentiment.POSITIVE: [
        "\U0001F600", "\U0001F603", "\U0001F604", "\U0001F601", "\U0001F606", "\U0001F60A",
        "\U0001F60D", "\U0001F970", "\U0001F618", "\U0001F602", "\U0001F923", "\U0001F60E",
        "\U0001F44D", "\U0001F64C", "\U0001F44F", "\U0001F389", "❤️", "\U0001F495",
        "\U0001F496", "\U0001F63B", "\U0001F973", "✨", "\U0001F917", "\U0001F607",
    ],
    Sentiment.NEUTRAL: [
        "\U0001F914", "\U0001F610", "\U0001F611", "\U0001F636", "\U0001F644", "\U0001F60F",
        "\U0001F937", "\U0001F440", "\U0001F4F1", "☕", "\U0001F355", "\U0001F3AE",
        "\U0001F3B5", "\U0001F3C0", "\U0001F4F7", "\U0001F30D",
    ],
    Sentiment.NEGATIVE: [
        "\U0001F622", "\U0001F62D", "\U0001F61E", "\U0001F614", "\U0001F61F", "\U0001F620",
        "\U0001F621", "\U0001F92C", "\U0001F624", "\U0001F494", "\U0001F629", "\U0001F62B",
        "\U0001F630", "\U0001F631", "\U0001F44E", "\U0001F92E", "\U0001F612", "\U0001F641",
    ],
}
# present in text but absent from the lookup table
UNMAPPED_EMOJIS = ["\U0001F984", "\U0001F335", "\U0001F680", "\U0001F308"]

UPLIFT_CHAIN = np.array([[0.30, 0.25, 0.45], [0.10, 0.35, 0.55], [0.05, 0.10, 0.85]])
FLAT_CHAIN = np.array([[0.70, 0.20, 0.10], [0.20, 0.65, 0.15], [0.15, 0.30, 0.55]])
INITIAL = np.array([0.35, 0.40, 0.25])


def default_emoji_table() -> EmojiSentimentTable:
    return EmojiSentimentTable({e: s for s, pool in EMOJIS.items() for e in pool})


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def _other(rng, s: Sentiment) -> Sentiment:
    return _pick(rng, [t for t in Sentiment if t != s])


def sentiment_text(rng, s: Sentiment, noise: float = 0.2) -> str:
    words = [_pick(rng, FILLER) for _ in range(int(rng.integers(2, 5)))]
    words += [_pick(rng, WORDS[s]) for _ in range(int(rng.integers(2, 4)))]
    if rng.random() < noise:
        words.append(_pick(rng, WORDS[_other(rng, s)]))
    rng.shuffle(words)
    return " ".join(words)


def emoji_suffix(rng, s: Sentiment, p_emoji=0.85, p_match=0.85, p_unmapped=0.1) -> str:
    if rng.random() >= p_emoji:
        return ""
    out = []
    for _ in range(int(rng.integers(1, 4))):
        if rng.random() < p_unmapped:
            out.append(_pick(rng, UNMAPPED_EMOJIS))
        elif rng.random() < p_match:
            out.append(_pick(rng, EMOJIS[s]))
        else:
            out.append(_pick(rng, EMOJIS[_other(rng, s)]))
    return " " + "".join(out)


def sentiment_chain(rng, n: int, transition: np.ndarray) -> list[Sentiment]:
    states = [Sentiment(int(rng.choice(3, p=INITIAL)))]
    while len(states) < n:
        states.append(Sentiment(int(rng.choice(3, p=transition[states[-1]]))))
    return states


def generate_dialogue(rng, dialogue_id: str, p_uplift: float = 0.35,
                      min_len: int = 2, max_len: int = 6) -> tuple[Dialogue, list[Sentiment]]:
    chain = UPLIFT_CHAIN if rng.random() < p_uplift else FLAT_CHAIN
    n = int(rng.integers(min_len, max_len + 1))
    states = sentiment_chain(rng, n, chain)
    utts = []
    for i, s in enumerate(states):
        text = sentiment_text(rng, s) + emoji_suffix(rng, s)
        utts.append(Utterance.from_text("A" if i % 2 == 0 else "B", text))
    return Dialogue(dialogue_id, tuple(utts)), states


def generate_dialogue_corpus(n_dialogues: int = 1000, seed: int = 7, p_uplift: float = 0.35) -> Corpus:
    rng = np.random.default_rng(seed)
    dialogues = [generate_dialogue(rng, f"syn-{i:05d}", p_uplift)[0] for i in range(n_dialogues)]
    return Corpus(tuple(dialogues), f"synthetic two-regime corpus (seed={seed}, p_uplift={p_uplift})")


SCORE_WEIGHTS = np.array([0.15, 0.10, 0.15, 0.25, 0.35])


def generate_reviews(n: int = 3000, seed: int = 11, label_noise: float = 0.1) -> list[ReviewRecord]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        score = int(rng.choice(5, p=SCORE_WEIGHTS)) + 1
        s = ReviewRecord("x", score).label
        if rng.random() < label_noise:
            s = _other(rng, s)
        out.append(ReviewRecord(sentiment_text(rng, s, noise=0.3), score))
    return out


def separable_dataset(n_per_class: int = 60, seed: int = 3, n_keywords: int = 10):
    """Texts built only from class-specific keywords; a perfect linear separator exists."""
    rng = np.random.default_rng(seed)
    data = []
    for s in Sentiment:
        pool = [f"{s}kw{i}" for i in range(n_keywords)]
        for _ in range(n_per_class):
            k = int(rng.integers(1, 4))
            data.append((" ".join(_pick(rng, pool) for _ in range(k)), s))
    order = rng.permutation(len(data))
    return [data[i] for i in order]


def heldout_contexts(n: int = 30, seed: int = 101) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        d, _ = generate_dialogue(rng, f"ctx-{i:03d}", p_uplift=0.5, min_len=3, max_len=5)
        texts = [u.text for u in d.utterances]
        out.append({"id": d.id, "context": texts[:-1], "reference": texts[-1]})
    return out

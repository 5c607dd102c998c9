"""Positively-transitioned sentiment dialogue enhancement toolkit."""

from ptdialog.corpus import (
    Corpus,
    CorpusStats,
    Dialogue,
    Sentiment,
    Utterance,
    compute_stats,
    load_corpus,
    save_corpus,
)
from ptdialog.emojis import extract_emojis

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "CorpusStats",
    "Dialogue",
    "Sentiment",
    "Utterance",
    "compute_stats",
    "extract_emojis",
    "load_corpus",
    "save_corpus",
]

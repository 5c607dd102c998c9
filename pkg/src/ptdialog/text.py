"""Shared tokenizer for the sentiment featurizer and the n-gram models."""

import re

SEP = "<sep>"
EOS = "<eos>"
UNK = "<unk>"
RESERVED = (SEP, EOS, UNK)

_WORD = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric codepoints.

    Reserved tokens contain ``<`` and ``>`` so they can never come out of here.
    """
    return _WORD.findall(text.lower())


def word_count(text: str) -> int:
    return len(text.split())

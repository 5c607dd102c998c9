"""Emoji sequence extraction backed by the bundled Unicode sequence list."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

DATA_FILE = "emoji_sequences.txt"


def load_sequences() -> list[str]:
    """All emoji sequences in the bundled inventory, in file order."""
    text = resources.files("ptdialog.data").joinpath(DATA_FILE).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        cps = line.split(";", 1)[0].split()
        out.append("".join(chr(int(cp, 16)) for cp in cps))
    return out


@lru_cache(maxsize=1)
def _pattern() -> re.Pattern[str]:
    # longest alternatives first so ZWJ / modifier sequences win over their parts
    seqs = sorted(set(load_sequences()), key=lambda s: (-len(s), s))
    firsts = "".join(re.escape(c) for c in sorted({s[0] for s in seqs}))
    alternation = "|".join(re.escape(s) for s in seqs)
    return re.compile(f"(?=[{firsts}])(?:{alternation})")


def extract_emojis(text: str) -> list[str]:
    """Return every maximal emoji sequence in ``text`` in occurrence order."""
    return _pattern().findall(text)


def strip_emojis(text: str) -> str:
    return _pattern().sub(" ", text)

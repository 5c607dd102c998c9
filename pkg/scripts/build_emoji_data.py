"""Regenerate the bundled emoji sequence inventory.

Dumps the Unicode emoji sequence list shipped with the ``emoji`` package
(pinned below) into ``src/ptdialog/data/emoji_sequences.txt``. Only needed
when bumping the Unicode version; the package itself never imports ``emoji``.

    pip install emoji==2.14.0
    python scripts/build_emoji_data.py
"""

from pathlib import Path

import emoji

PINNED = "2.14.0"
STATUS = {1: "component", 2: "fully-qualified", 3: "minimally-qualified", 4: "unqualified"}
OUT = Path(__file__).resolve().parents[1] / "src" / "ptdialog" / "data" / "emoji_sequences.txt"


def main():
    if emoji.__version__ != PINNED:
        raise SystemExit(f"expected emoji=={PINNED}, found {emoji.__version__}")
    lines = [
        f"# emoji sequences from the emoji package {PINNED} (Unicode 15.1)",
        "# format: space-separated hex codepoints ; qualification status # name",
    ]
    for seq in sorted(emoji.EMOJI_DATA, key=lambda s: [ord(c) for c in s]):
        entry = emoji.EMOJI_DATA[seq]
        cps = " ".join(f"{ord(c):04X}" for c in seq)
        lines.append(f"{cps} ; {STATUS[entry['status']]} # {entry['en'].strip(':')}")
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines) - 2} sequences to {OUT}")


if __name__ == "__main__":
    main()

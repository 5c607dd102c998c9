"""Write the bundled fixtures under data/ (deterministic; safe to rerun)."""

import csv
import json
from pathlib import Path

from ptdialog.corpus import save_corpus
from ptdialog.labeling import save_emoji_table
from ptdialog.synthetic import (
    default_emoji_table,
    generate_dialogue_corpus,
    generate_reviews,
    heldout_contexts,
)

DATA = Path(__file__).resolve().parents[1] / "data"


def main():
    DATA.mkdir(exist_ok=True)
    save_emoji_table(default_emoji_table(), DATA / "emoji_table.tsv")

    with (DATA / "reviews.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["text", "score"])
        for r in generate_reviews():
            w.writerow([r.text, r.score])

    save_corpus(generate_dialogue_corpus(), DATA / "synthetic_corpus.jsonl")

    with (DATA / "heldout_contexts.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for rec in heldout_contexts():
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    for p in sorted(DATA.iterdir()):
        print(f"{p.name}: {p.stat().st_size} bytes")


if __name__ == "__main__":
    main()

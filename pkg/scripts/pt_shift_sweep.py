"""Sweep synthetic-corpus seeds and report how PT extraction shifts P(state -> positive).

Trains the sentiment predictor once on data/reviews.csv, then for each seed
generates a fresh dialogue corpus, labels it, extracts PT dialogues and prints
the per-state deltas as CSV on stdout.

    python scripts/pt_shift_sweep.py --seeds 0 1 2 --mode must_reach_positive
"""

import argparse
import csv
import sys
from pathlib import Path

from ptdialog.labeling import (
    SplitSpec,
    TrainingConfig,
    label_corpus,
    load_emoji_table,
    read_reviews,
    split_reviews,
    train_sp,
)
from ptdialog.synthetic import generate_dialogue_corpus
from ptdialog.transitions import PTConfig, compare_transitions, extract_pt, transition_matrix

DATA = Path(__file__).resolve().parents[1] / "data"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(5)))
    ap.add_argument("--dialogues", type=int, default=1000)
    ap.add_argument("--mode", default="any_increase", choices=["any_increase", "must_reach_positive"])
    ap.add_argument("--pairing", default="consecutive_utterances",
                    choices=["consecutive_utterances", "same_speaker_consecutive"])
    args = ap.parse_args(argv)

    train, valid, _ = split_reviews(read_reviews(DATA / "reviews.csv"), SplitSpec())
    model = train_sp(train, valid, TrainingConfig())
    table = load_emoji_table(DATA / "emoji_table.tsv")

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["seed", "n_pt", "from_state", "before_p", "after_p", "delta"])
    for seed in args.seeds:
        labeled = label_corpus(generate_dialogue_corpus(args.dialogues, seed=seed), model, table)
        pt = extract_pt(labeled, PTConfig(mode=args.mode))
        rows = compare_transitions(transition_matrix(labeled, args.pairing), transition_matrix(pt, args.pairing))
        for r in rows:
            out.writerow([seed, len(pt), str(r.from_state), f"{r.before_p:.4f}", f"{r.after_p:.4f}", f"{r.delta:+.4f}"])


if __name__ == "__main__":
    main()

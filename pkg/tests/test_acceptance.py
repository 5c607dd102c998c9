"""Exit criteria for the build, one test per criterion.

Each test asserts its tolerance and runtime bound and appends a PASS/FAIL
line that is printed in the terminal summary.
"""

import json
import math
import time
from collections import Counter
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, DATA, GOLDEN, ROOT, random_labeled_corpus
from oracles import bleu_by_hand, pair_counts, pt_predicate
from ptdialog.cli import main
from ptdialog.corpus import Sentiment, load_corpus, stats_from_counts
from ptdialog.evaluation import bleu, classification_metrics, f1_score
from ptdialog.labeling import (
    SplitSpec,
    TrainingConfig,
    label_corpus,
    load_emoji_table,
    loss_and_grad,
    read_reviews,
    split_reviews,
    train_sp,
)
from ptdialog.responder import (
    GenerationConfig,
    NGramLM,
    draw_candidates,
    generate,
    greedy_decode,
    mmi_rerank,
    reverse_score,
    sample_top_k,
    train_lm,
)
from ptdialog.synthetic import generate_dialogue_corpus, separable_dataset
from ptdialog.text import EOS, SEP
from ptdialog.transitions import (
    PTConfig,
    compare_transitions,
    extract_pt,
    transition_matrix,
)
from test_evaluation import BLEU_CASES


@contextmanager
def criterion(number: int, title: str, max_seconds: float):
    info: dict = {}
    start = time.perf_counter()
    try:
        yield info
    except BaseException as e:
        elapsed = time.perf_counter() - start
        ACCEPTANCE_LINES.append(f"FAIL criterion {number:>2} ({title}): {type(e).__name__} [{elapsed:.2f} s]")
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < max_seconds
    detail = info.get("detail", "")
    ACCEPTANCE_LINES.append(
        f"{'PASS' if ok else 'FAIL'} criterion {number:>2} ({title}): {detail} "
        f"[{elapsed:.2f} s, limit {max_seconds:g} s]")
    assert ok, f"criterion {number} took {elapsed:.2f} s (limit {max_seconds} s)"


def test_c01_f1_identity():
    with criterion(1, "f1 from reported P/R", 1.0) as info:
        f1 = f1_score(0.91, 0.87)
        assert abs(f1 - 0.89) <= 0.005
        gold = [Sentiment.NEGATIVE] * 3 + [Sentiment.NEUTRAL] * 3 + [Sentiment.POSITIVE] * 3
        report = classification_metrics(gold, gold[::-1])
        assert report.to_text().split("\n")[0].split() == ["sentiment", "precision", "recall", "f1-score", "support"]
        assert [str(s) for s in report.per_class] == ["negative", "neutral", "positive"]
        info["detail"] = f"f1={f1:.4f}"


def test_c02_table_arithmetic():
    with criterion(2, "avg utterances per dialogue", 1.0) as info:
        s = stats_from_counts(67205, 302475, 0)
        assert abs(s.avg_utterances_per_dialogue - 4.50) <= 0.01
        info["detail"] = f"{s.avg_utterances_per_dialogue:.4f}"


def test_c03_pt_oracle_equivalence():
    with criterion(3, "PT extraction vs brute force", 5.0) as info:
        corpus = random_labeled_corpus(1000, seed=2024)
        kept = {}
        for tracked in ("first_speaker", "all_speakers"):
            for mode in ("any_increase", "must_reach_positive"):
                got = extract_pt(corpus, PTConfig(tracked_speaker=tracked, mode=mode)).dialogues
                expected = tuple(d for d in corpus.dialogues if pt_predicate(d, tracked, mode))
                assert got == expected
                kept[f"{tracked}/{mode}"] = len(got)
        info["detail"] = ", ".join(f"{k}={v}" for k, v in kept.items())


def test_c04_transition_soundness():
    with criterion(4, "transition counts vs brute force", 5.0) as info:
        corpus = random_labeled_corpus(1000, seed=77)
        totals = []
        for pairing in ("consecutive_utterances", "same_speaker_consecutive"):
            m = transition_matrix(corpus, pairing)
            assert np.array_equal(m.counts, pair_counts(corpus, pairing))
            for row, n in zip(m.probabilities, m.counts.sum(axis=1)):
                if n:
                    assert abs(row.sum() - 1.0) <= 1e-9
            totals.append(m.total)
        info["detail"] = f"pairs={totals}"


def test_c05_pt_shifts_toward_positive():
    with criterion(5, "PT subset raises P(state->positive)", 30.0) as info:
        corpus = load_corpus(DATA / "synthetic_corpus.jsonl")
        assert len(corpus) >= 500
        train, valid, _ = split_reviews(read_reviews(DATA / "reviews.csv"), SplitSpec())
        model = train_sp(train, valid, TrainingConfig())
        labeled = label_corpus(corpus, model, load_emoji_table(DATA / "emoji_table.tsv"))
        pt = extract_pt(labeled)
        deltas = compare_transitions(transition_matrix(labeled), transition_matrix(pt))
        assert len(pt) > 0
        assert all(r.delta > 0 for r in deltas)
        info["detail"] = f"{len(pt)}/{len(corpus)} PT; " + ", ".join(
            f"{r.from_state}:{r.delta:+.3f}" for r in deltas)


def test_c06_predictor_quality():
    with criterion(6, "linear predictor quality", 60.0) as info:
        data = separable_dataset(100, seed=21)
        model = train_sp(data[:200], data[200:240], TrainingConfig(min_token_freq=1))
        sep_acc = np.mean([model.predict(t) == s for t, s in data[240:]])
        assert sep_acc >= 0.95

        train, valid, test = split_reviews(read_reviews(DATA / "reviews.csv"), SplitSpec())
        model = train_sp(train, valid, TrainingConfig())
        preds = model.predict_many([r.text for r in test])
        acc = np.mean([p == r.label for p, r in zip(preds, test)])
        majority = Counter(r.label for r in test).most_common(1)[0][1] / len(test)
        assert acc >= majority + 0.10
        info["detail"] = f"separable={sep_acc:.3f}, reviews={acc:.3f} vs majority {majority:.3f}"


def test_c07_gradient_check():
    with criterion(7, "analytic vs finite-difference gradients", 10.0) as info:
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            d = int(rng.integers(2, 7))
            n = int(rng.integers(3, 12))
            X = rng.poisson(1.5, size=(n, d + 1)).astype(float)
            X[:, -1] = 1.0
            y = rng.integers(0, 3, size=n)
            W = rng.normal(scale=0.5, size=(3, d + 1))
            l2 = float(rng.uniform(0, 0.3))
            _, g = loss_and_grad(W, X, y, l2)
            num = np.zeros_like(W)
            h = 1e-5
            for idx in np.ndindex(*W.shape):
                Wp, Wm = W.copy(), W.copy()
                Wp[idx] += h
                Wm[idx] -= h
                num[idx] = (loss_and_grad(Wp, X, y, l2)[0] - loss_and_grad(Wm, X, y, l2)[0]) / (2 * h)
            rel = np.linalg.norm(g - num) / max(np.linalg.norm(g), np.linalg.norm(num))
            worst = max(worst, rel)
        assert worst <= 1e-4
        info["detail"] = f"max relative error {worst:.2e}"


@pytest.fixture(scope="module")
def lms():
    corpus = generate_dialogue_corpus(200, seed=31)
    return train_lm(corpus, "forward", 3), train_lm(corpus, "reverse", 3)


def test_c08_mmi_argmax(lms):
    fwd, rev = lms
    with criterion(8, "MMI rerank picks the max reverse score", 10.0) as info:
        rng = np.random.default_rng(8)
        words = [t for t in fwd.vocabulary if t not in ("<sep>", "<eos>", "<unk>")]
        for i in range(100):
            ctx = [str(w) for w in rng.choice(words, int(rng.integers(1, 6)))] + [SEP]
            cands = [tuple(str(w) for w in rng.choice(words, int(rng.integers(1, 6)))) + (EOS,)
                     for _ in range(10)]
            scores = [reverse_score(rev, ctx, c) for c in cands]
            best = max(range(10), key=lambda j: (scores[j], -j))
            ranked = mmi_rerank(fwd, rev, ctx, cands)
            assert ranked[0][0] == cands[best]
            assert ranked[0][1] == max(scores)

            cfg = GenerationConfig(top_k=10, n_candidates=10, max_length=12, seed=i)
            out = generate(fwd, rev, ctx, cfg)
            drawn = [reverse_score(rev, ctx, c) for c in draw_candidates(fwd, ctx, cfg)]
            assert reverse_score(rev, ctx, out) == max(drawn)
        info["detail"] = "100/100 instances"


def test_c09_lm_normalization_and_sampling(lms):
    fwd, rev = lms
    with criterion(9, "LM normalization and top-K sampling", 30.0) as info:
        rng = np.random.default_rng(9)
        vocab = list(fwd.vocabulary) + ["never-seen"]
        worst = 0.0
        for _ in range(1000):
            history = [str(t) for t in rng.choice(vocab, int(rng.integers(0, 5)))]
            for lm in (fwd, rev):
                worst = max(worst, abs(lm.next_token_distribution(history).sum() - 1.0))
        assert worst <= 1e-9

        for seed in range(20):
            ctx = [str(t) for t in rng.choice(vocab, 3)] + [SEP]
            assert sample_top_k(fwd, ctx, GenerationConfig(top_k=1, max_length=20, seed=seed)) == \
                greedy_decode(fwd, ctx, 20)

        two = NGramLM(1, ("x", "y", "z"), [{(): Counter({"x": 9, "y": 1})}], (1.0,), 0.1)
        # P(x), P(y), P(z) = 9.1, 1.1, 0.1 over 10.3; top-2 renormalized over 10.2
        p_x = 9.1 / 10.2
        n = 10_000
        hits = sum(sample_top_k(two, [], GenerationConfig(top_k=2, max_length=1, seed=s))[0] == "x"
                   for s in range(n))
        se = math.sqrt(p_x * (1 - p_x) / n)
        assert abs(hits / n - p_x) <= 3 * se
        info["detail"] = f"max |sum-1|={worst:.1e}, freq(x)={hits / n:.4f} vs {p_x:.4f} (3se={3 * se:.4f})"


def test_c10_bleu_oracle():
    with criterion(10, "sentence BLEU oracle", 1.0) as info:
        for hyp, ref, expected in BLEU_CASES:
            assert abs(bleu(hyp.split(), ref.split()) - expected) <= 1e-6
        rng = np.random.default_rng(10)
        for _ in range(100):
            h = [str(t) for t in rng.choice(list("abcdefghij"), int(rng.integers(4, 20)))]
            assert bleu(h, h) == 1.0 or abs(bleu(h, h) - 1.0) <= 1e-12
        info["detail"] = f"{len(BLEU_CASES)} hand cases, 100 self-BLEU"


def _pipeline_config(tmp_path, name):
    import yaml

    raw = yaml.safe_load((ROOT / "configs" / "pipeline.yaml").read_text(encoding="utf-8"))
    for key in ("reviews", "corpus", "emoji_table", "contexts"):
        raw["paths"][key] = str((ROOT / "configs" / raw["paths"][key]).resolve())
    raw["paths"]["output_dir"] = str(tmp_path / name)
    path = tmp_path / f"{name}.yaml"
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


def test_c11_end_to_end_determinism(tmp_path):
    with criterion(11, "pipeline determinism", 120.0) as info:
        manifests, times = [], []
        for name in ("run1", "run2"):
            start = time.perf_counter()
            assert main(["pipeline", "--config", str(_pipeline_config(tmp_path, name))]) == 0
            times.append(time.perf_counter() - start)
            manifests.append((tmp_path / name / "manifest.json").read_bytes())
        assert all(t < 60 for t in times)
        assert manifests[0] == manifests[1]
        artifacts = json.loads(manifests[0])["artifacts"]
        assert len(artifacts) >= 10
        for tag in ("source", "pt"):
            produced = (tmp_path / "run1" / f"transitions_{tag}.dot").read_bytes()
            assert produced == (GOLDEN / f"pipeline_transitions_{tag}.dot").read_bytes()
        info["detail"] = f"{len(artifacts)} artifacts, runs {times[0]:.1f} s / {times[1]:.1f} s"

import json
import math

import pytest
from hypothesis import given, settings

from conftest import corpora
from ptdialog.corpus import (
    Corpus,
    CorpusFormatError,
    CorpusValidationError,
    Dialogue,
    Sentiment,
    Utterance,
    compute_stats,
    load_corpus,
    save_corpus,
    stats_csv,
    stats_from_counts,
)


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def record(did, texts, **labels):
    return json.dumps({"id": did, "utterances": [{"speaker": "A", "text": t, **labels} for t in texts]})


class TestSentiment:
    def test_order(self):
        assert Sentiment.NEGATIVE < Sentiment.NEUTRAL < Sentiment.POSITIVE
        assert sorted(Sentiment, reverse=True)[0] is Sentiment.POSITIVE

    def test_parse_is_exact(self):
        assert Sentiment.parse("neutral") is Sentiment.NEUTRAL
        with pytest.raises(ValueError):
            Sentiment.parse("Neutral")
        with pytest.raises(ValueError):
            Sentiment.parse("happy")


class TestDataModel:
    def test_empty_text_rejected(self):
        with pytest.raises(CorpusValidationError):
            Utterance("A", "   ")

    def test_fused_requires_agreement(self):
        with pytest.raises(CorpusValidationError):
            Utterance("A", "x", sp_label=Sentiment.POSITIVE, emoji_label=Sentiment.NEGATIVE,
                      fused_label=Sentiment.POSITIVE)
        with pytest.raises(CorpusValidationError):
            Utterance("A", "x", sp_label=Sentiment.POSITIVE, fused_label=Sentiment.POSITIVE)

    def test_short_dialogue_rejected(self):
        with pytest.raises(CorpusValidationError):
            Dialogue("d", (Utterance("A", "only one"),))

    def test_duplicate_ids_rejected(self):
        d = Dialogue("d", (Utterance("A", "x"), Utterance("B", "y")))
        with pytest.raises(CorpusValidationError, match="duplicate"):
            Corpus((d, d))


class TestLoad:
    def test_two_dialogues(self, tmp_path):
        p = write_lines(tmp_path / "c.jsonl", [record("a", ["x", "y"]), record("b", ["z", "w \U0001F600"])])
        c = load_corpus(p)
        assert len(c) == 2
        assert c.dialogues[1].utterances[1].emojis == ("\U0001F600",)

    def test_empty_file(self, tmp_path):
        c = load_corpus(write_lines(tmp_path / "c.jsonl", []))
        assert len(c) == 0
        with pytest.raises(ValueError, match="empty"):
            compute_stats(c)

    def test_missing_utterances_names_line(self, tmp_path):
        p = write_lines(tmp_path / "c.jsonl", [json.dumps({"id": "a"})])
        with pytest.raises(CorpusFormatError, match="line 1") as exc:
            load_corpus(p)
        assert exc.value.line == 1

    def test_bad_json_names_line(self, tmp_path):
        p = write_lines(tmp_path / "c.jsonl", [record("a", ["x", "y"]), "{not json"])
        with pytest.raises(CorpusFormatError, match="line 2"):
            load_corpus(p)

    def test_duplicate_id(self, tmp_path):
        p = write_lines(tmp_path / "c.jsonl", [record("a", ["x", "y"]), record("a", ["x", "y"])])
        with pytest.raises(CorpusValidationError, match="duplicate"):
            load_corpus(p)

    def test_short_dialogue(self, tmp_path):
        p = write_lines(tmp_path / "c.jsonl", [record("a", ["x"])])
        with pytest.raises(CorpusValidationError, match="at least 2"):
            load_corpus(p)

    def test_bad_label(self, tmp_path):
        p = write_lines(tmp_path / "c.jsonl", [record("a", ["x", "y"], sp_label="great")])
        with pytest.raises(CorpusFormatError, match="line 1"):
            load_corpus(p)


class TestSave:
    def test_labels_preserved(self, tmp_path):
        u = Utterance.from_text("A", "so good \U0001F600", sp_label=Sentiment.POSITIVE,
                                emoji_label=Sentiment.POSITIVE, fused_label=Sentiment.POSITIVE)
        c = Corpus((Dialogue("d", (u, Utterance.from_text("B", "ok", sp_label=Sentiment.NEUTRAL))),))
        save_corpus(c, tmp_path / "c.jsonl")
        line = (tmp_path / "c.jsonl").read_text(encoding="utf-8")
        assert '"fused_label": "positive"' in line
        assert "\U0001F600" in line
        assert load_corpus(tmp_path / "c.jsonl") == c

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError, match="cannot write"):
            save_corpus(Corpus(), tmp_path / "missing-dir" / "c.jsonl")

    @settings(max_examples=60, deadline=None)
    @given(corpora())
    def test_round_trip(self, tmp_path_factory, corpus):
        path = tmp_path_factory.mktemp("rt") / "c.jsonl"
        save_corpus(corpus, path)
        assert load_corpus(path) == corpus


class TestStats:
    def test_table_counts(self):
        s = stats_from_counts(67205, 302475, 0)
        assert s.avg_utterances_per_dialogue == pytest.approx(4.50, abs=0.01)

    def test_single_dialogue(self):
        d = Dialogue("d", tuple(Utterance.from_text("A", "two words") for _ in range(3)))
        s = compute_stats(Corpus((d,)))
        assert (s.n_dialogues, s.n_utterances, s.avg_utterances_per_dialogue,
                s.avg_words_per_utterance, s.avg_words_per_dialogue) == (1, 3, 3.0, 2.0, 6.0)

    def test_all_positive(self):
        p = Sentiment.POSITIVE
        u = Utterance.from_text("A", "yay", sp_label=p, emoji_label=p, fused_label=p)
        s = compute_stats(Corpus((Dialogue("d", (u, u, u)),)))
        assert s.label_distribution == {"negative": 0, "neutral": 0, "positive": 3, "unlabeled": 0}

    @settings(max_examples=80, deadline=None)
    @given(corpora())
    def test_matches_recount(self, corpus):
        if len(corpus) == 0:
            return
        s = compute_stats(corpus)
        utts = [u for d in corpus.dialogues for u in d.utterances]
        words = sum(len(u.text.split()) for u in utts)
        assert s.n_dialogues == len(corpus.dialogues)
        assert s.n_utterances == len(utts)
        assert sum(s.label_distribution.values()) == len(utts)
        assert s.label_distribution["unlabeled"] == sum(u.fused_label is None for u in utts)
        assert math.isclose(s.avg_utterances_per_dialogue, len(utts) / len(corpus.dialogues), rel_tol=1e-9)
        assert math.isclose(s.avg_words_per_dialogue,
                            s.avg_words_per_utterance * s.avg_utterances_per_dialogue, rel_tol=1e-9)

    def test_reports(self, tiny_corpus):
        s = compute_stats(tiny_corpus)
        text = s.to_text()
        assert "avg_utterances_per_dialogue: 3.0000" in text
        csv_text = stats_csv({"source": s, "pt": s})
        assert csv_text.splitlines()[0] == "statistic,source,pt"
        assert "n_utterances,3,3" in csv_text

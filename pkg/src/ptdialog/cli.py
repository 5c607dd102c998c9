"""Command-line entry point: ``ptdialog <stage> --config run.yaml``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from ptdialog.config import ConfigError, PipelineConfig, load_config, with_overrides
from ptdialog.corpus import Corpus, Sentiment, compute_stats, load_corpus, save_corpus, stats_csv
from ptdialog.evaluation import classification_metrics, evaluate_responses
from ptdialog.labeling import (
    LinearSentimentModel,
    label_corpus,
    load_emoji_table,
    read_reviews,
    split_reviews,
    train_sp,
)
from ptdialog.responder import (
    NGramLM,
    context_tokens,
    detokenize,
    draw_candidates,
    mmi_rerank,
    reverse_score,
    train_lm,
)
from ptdialog.transitions import (
    Pairing,
    compare_transitions,
    comparison_csv,
    extract_pt,
    matrix_csv,
    render_transition_dot,
    transition_matrix,
)

log = logging.getLogger("ptdialog")

MANIFEST = "manifest.json"


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _read_jsonl(path: Path) -> list[dict]:
    out = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}: line {line_no}: invalid JSON ({e.msg})") from None
            if not isinstance(obj, dict) or "id" not in obj:
                raise ValueError(f"{path}: line {line_no}: record must be an object with an 'id'")
            out.append(obj)
    return out


def _utterances(value) -> list[str]:
    return [value] if isinstance(value, str) else list(value)


# -- stages -----------------------------------------------------------------------


def stage_train_sp(cfg: PipelineConfig) -> list[Path]:
    records = read_reviews(cfg.paths.reviews)
    train, valid, test = split_reviews(records, cfg.split)
    model = train_sp(train, valid, cfg.training)
    log.info("trained predictor: vocab=%d loss %.4f -> %.4f",
             len(model.vocabulary), model.loss_history[0], model.loss_history[-1])
    model_path = cfg.sp_model_path
    model_path.parent.mkdir(parents=True, exist_ok=True)
    model.save(model_path)

    report = classification_metrics([r.label for r in test], model.predict_many([r.text for r in test]))
    rows = ["split,negative,neutral,positive,total"]
    for name, part in (("train", train), ("valid", valid), ("test", test)):
        c = Counter(r.label for r in part)
        rows.append(f"{name},{c[Sentiment.NEGATIVE]},{c[Sentiment.NEUTRAL]},{c[Sentiment.POSITIVE]},{len(part)}")
    return [
        model_path,
        _write(cfg.artifact("sp_classification_report.txt"), report.to_text()),
        _write(cfg.artifact("sp_classification_report.csv"), report.to_csv()),
        _write(cfg.artifact("review_label_distribution.csv"), "\n".join(rows) + "\n"),
    ]


def stage_enhance(cfg: PipelineConfig) -> list[Path]:
    corpus = load_corpus(cfg.paths.corpus)
    model = LinearSentimentModel.load(cfg.sp_model_path)
    table = load_emoji_table(cfg.paths.emoji_table)
    labeled = label_corpus(corpus, model, table)
    pt = extract_pt(labeled, cfg.pt)
    if len(pt) == 0:
        log.warning("no positively transitioned dialogues found (%d fused labels in %d dialogues)",
                    sum(u.fused_label is not None for u in labeled.utterances()), len(labeled))

    written = []
    for name, c in (("labeled_corpus.jsonl", labeled), ("pt_corpus.jsonl", pt)):
        save_corpus(c, cfg.artifact(name))
        written.append(cfg.artifact(name))
        if c.provenance:
            written.append(cfg.artifact(name + ".meta.json"))

    stats = {"source": compute_stats(labeled)} if len(labeled) else {}
    if len(pt):
        stats["pt"] = compute_stats(pt)
    if stats:
        text = "".join(f"[{name}]\n{s.to_text()}\n" for name, s in stats.items())
        written.append(_write(cfg.artifact("corpus_stats.txt"), text))
        written.append(_write(cfg.artifact("corpus_stats.csv"), stats_csv(stats)))

    pairing = Pairing(cfg.transitions.pairing)
    before = transition_matrix(labeled, pairing)
    after = transition_matrix(pt, pairing)
    threshold = cfg.transitions.threshold
    for tag, m in (("source", before), ("pt", after)):
        written.append(_write(cfg.artifact(f"transitions_{tag}.dot"),
                              render_transition_dot(m, threshold, name=f"{tag}_transitions")))
        written.append(_write(cfg.artifact(f"transitions_{tag}.csv"), matrix_csv(m)))
    written.append(_write(cfg.artifact("transition_comparison.csv"),
                          comparison_csv(compare_transitions(before, after))))
    log.info("enhance: %d -> %d dialogues", len(labeled), len(pt))
    return written


def stage_train_lm(cfg: PipelineConfig) -> list[Path]:
    corpus = load_corpus(cfg.lm_corpus_path)
    written = []
    for direction, path in (("forward", cfg.forward_lm_path), ("reverse", cfg.reverse_lm_path)):
        lm = train_lm(corpus, direction, cfg.lm.order, cfg.lm.additive_alpha)
        path.parent.mkdir(parents=True, exist_ok=True)
        lm.save(path, direction)
        written.append(path)
    return written


def stage_respond(cfg: PipelineConfig) -> list[Path]:
    forward = NGramLM.load(cfg.forward_lm_path)
    reverse = NGramLM.load(cfg.reverse_lm_path)
    lines = []
    for rec in _read_jsonl(cfg.paths.contexts):
        if "context" not in rec:
            raise ValueError(f"context record {rec['id']!r} has no 'context' field")
        ctx = context_tokens(_utterances(rec["context"]))
        drawn = draw_candidates(forward, ctx, cfg.generation)
        best = mmi_rerank(forward, reverse, ctx, drawn)[0]
        out = {
            "id": rec["id"],
            "response": detokenize(best[0]),
            "candidates": [
                {"text": detokenize(c), "reverse_score": reverse_score(reverse, ctx, c)} for c in drawn
            ],
        }
        lines.append(json.dumps(out, ensure_ascii=False))
    return [_write(cfg.responses_path, "".join(line + "\n" for line in lines))]


def stage_evaluate(cfg: PipelineConfig) -> list[Path]:
    responses = {r["id"]: r for r in _read_jsonl(cfg.responses_path)}
    references = _read_jsonl(cfg.paths.contexts)
    ref_ids = {r["id"] for r in references}
    missing_resp = sorted(ref_ids - set(responses), key=str)
    missing_ref = sorted(set(responses) - ref_ids, key=str)
    if missing_resp or missing_ref:
        parts = []
        if missing_resp:
            parts.append(f"no response for id(s): {', '.join(map(str, missing_resp))}")
        if missing_ref:
            parts.append(f"no reference for id(s): {', '.join(map(str, missing_ref))}")
        raise ValueError("; ".join(parts))
    pairs = []
    for ref in references:
        if "reference" not in ref:
            raise ValueError(f"reference record {ref['id']!r} has no 'reference' field")
        query = ref.get("query") or _utterances(ref.get("context", [""]))[-1]
        pairs.append({"id": ref["id"], "query": query,
                      "response": responses[ref["id"]]["response"], "reference": ref["reference"]})
    if not pairs:
        raise ValueError("no responses to evaluate")
    background = load_corpus(cfg.background_path)
    lm = train_lm(background, "forward", cfg.metrics.fluency_order, cfg.lm.additive_alpha)
    report = evaluate_responses(pairs, lm, background)
    return [
        _write(cfg.artifact("metrics_per_example.csv"), report.per_example_csv()),
        _write(cfg.artifact("metrics_summary.json"), report.aggregate_json()),
        _write(cfg.artifact("metrics_histogram.csv"), report.histogram_csv(cfg.metrics.histogram_bins)),
    ]


STAGES = {
    "train-sp": (stage_train_sp, ("reviews",)),
    "enhance": (stage_enhance, ("corpus", "emoji_table", "sp_model")),
    "train-lm": (stage_train_lm, ("lm_corpus",)),
    "respond": (stage_respond, ("forward_lm", "reverse_lm", "contexts")),
    "evaluate": (stage_evaluate, ("responses", "contexts", "background")),
}
PIPELINE = ("train-sp", "enhance", "train-lm", "respond", "evaluate")
# inputs the pipeline must find before running; later stages consume earlier outputs
PIPELINE_INPUTS = ("reviews", "corpus", "emoji_table", "contexts")


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out: Path) -> Path:
    entries = []
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != MANIFEST:
            entries.append({"path": p.relative_to(out).as_posix(), "sha256": sha256(p),
                            "bytes": p.stat().st_size})
    return _write(out / MANIFEST, json.dumps({"artifacts": entries}, indent=2) + "\n")


def run_stage(name: str, cfg: PipelineConfig) -> list[Path]:
    fn, _ = STAGES[name]
    try:
        return fn(cfg)
    except (OSError, ValueError, FloatingPointError, KeyError) as e:
        raise StageError(name, str(e)) from e


def run(command: str, cfg: PipelineConfig) -> list[Path]:
    cfg.validate()
    if command == "pipeline":
        cfg.require(*PIPELINE_INPUTS)
        cfg.out.mkdir(parents=True, exist_ok=True)
        written = []
        for name in PIPELINE:
            written += run_stage(name, cfg)
        written.append(write_manifest(cfg.out))
        return written
    cfg.require(*STAGES[command][1])
    cfg.out.mkdir(parents=True, exist_ok=True)
    return run_stage(command, cfg)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML pipeline configuration")
    common.add_argument("--seed", type=int, help="override every seed in the config")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--threshold", type=float, help="transition edge highlight threshold")
    common.add_argument("--top-k", type=int, dest="top_k", help="top-K sampling cutoff")
    common.add_argument("--mode", choices=["any_increase", "must_reach_positive"],
                        help="positive-transition criterion")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ptdialog", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "train-sp": "train the sentiment predictor on review data",
        "enhance": "label a corpus, extract PT dialogues, write stats and transition diagrams",
        "train-lm": "train forward and reverse n-gram models on the PT corpus",
        "respond": "generate MMI-reranked responses for a contexts file",
        "evaluate": "score responses with context / fluency / BLEU",
        "pipeline": "run every stage in order and write a hashed manifest",
    }
    for name, text in helps.items():
        sub.add_parser(name, help=text, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    log.propagate = False
    try:
        cfg = load_config(args.config) if args.config else PipelineConfig()
        cfg = with_overrides(cfg, args.seed, args.out, args.threshold, args.top_k, args.mode)
        cfg.validate()
    except ConfigError as e:
        print(f"error [config]: {e}", file=sys.stderr)
        return 2
    try:
        run(args.command, cfg)
    except ConfigError as e:
        print(f"error [config]: {e}", file=sys.stderr)
        return 2
    except StageError as e:
        print(f"error {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

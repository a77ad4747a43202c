"""Command-line pipeline: ingest, metrics, gen-twi, gen-twm, export,
score, agreement. Stages hand off through JSON/npz files so each is
independently rerunnable; every artifact embeds its config, seed, and
toolkit version, and reruns with identical inputs are byte-identical.

Exit codes: 0 success, 2 validation failure, 3 I/O failure, 4 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import Vocabulary, WindowCounts, build_vocabulary, count_windows, \
    load_corpus
from .embeddings import load_embeddings
from .errors import InvariantError, ValidationError
from .metrics import CoherenceConfig, metric_report
from .model_io import load_models_dir
from .scoring import AnnotationSet, ScoringContext, report_to_csv_rows, score_report
from .seeding import child_seed
from .taskgen import SamplingPlan, assemble_bundle, bundle_to_json, dump_json, \
    gen_twi, gen_twm, load_bundle_file, load_key_file, write_bundle_files

logger = logging.getLogger(__name__)

COMMON_DEFAULTS = {"seed": 0, "out_dir": "out", "config": None}

CMD_DEFAULTS = {
    "ingest": {"corpus": None, "format": "text", "min_sentence_freq": 50,
               "window_size": 110, "engine": "auto"},
    "metrics": {"models_dir": None, "corpus": None, "format": "text",
                "min_sentence_freq": 50, "window_size": 110, "engine": "auto",
                "counts_dir": None, "top_n": 10, "diversity_top_n": 10,
                "epsilon": 1e-12, "exclude_self": False},
    "gen-twi": {"models_dir": None, "vocab": None, "embeddings": None,
                "sampling": "paper", "controls": 1, "n_tracks": 4,
                "format": "native-json"},
    "gen-twm": {"models_dir": None, "embeddings": None, "metrics_dir": None,
                "sampling": "paper", "controls": 1, "n_tracks": 4,
                "format": "native-json", "topic_embed_topn": 50},
    "export": {"bundle": None, "key": None, "format": "labelstudio-json"},
    "score": {"bundle": None, "key": None, "annotations": None,
              "labelstudio": False, "task_level_regression": False,
              "bootstrap": 2000},
    "agreement": {"bundle": None, "key": None, "annotations": None,
                  "labelstudio": False},
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicbench",
        description="Evaluate topic models automatically and via human "
                    "annotation campaigns.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)
    S = argparse.SUPPRESS

    def add_common(p):
        p.add_argument("--seed", type=int, default=S, help="master 64-bit seed")
        p.add_argument("--out-dir", dest="out_dir", default=S)
        p.add_argument("--config", default=S,
                       help="JSON file mirroring the flags; flags override it")

    p = sub.add_parser("ingest", help="build vocabulary and window counts")
    add_common(p)
    p.add_argument("--corpus", default=S)
    p.add_argument("--format", choices=["text", "jsonl"], default=S)
    p.add_argument("--min-sentence-freq", dest="min_sentence_freq", type=int, default=S)
    p.add_argument("--window-size", dest="window_size", type=int, default=S)
    p.add_argument("--engine", choices=["auto", "python", "numba"], default=S)

    p = sub.add_parser("metrics", help="coherence and diversity per model")
    add_common(p)
    p.add_argument("--models-dir", dest="models_dir", default=S)
    p.add_argument("--corpus", default=S)
    p.add_argument("--format", choices=["text", "jsonl"], default=S)
    p.add_argument("--min-sentence-freq", dest="min_sentence_freq", type=int, default=S)
    p.add_argument("--window-size", dest="window_size", type=int, default=S)
    p.add_argument("--engine", choices=["auto", "python", "numba"], default=S)
    p.add_argument("--counts-dir", dest="counts_dir", default=S,
                   help="reuse an ingest output directory instead of --corpus")
    p.add_argument("--top-n", dest="top_n", type=int, default=S)
    p.add_argument("--diversity-top-n", dest="diversity_top_n", type=int, default=S)
    p.add_argument("--epsilon", type=float, default=S)
    p.add_argument("--exclude-self", dest="exclude_self", action="store_true",
                   default=S, help="drop the self term from context vectors")

    p = sub.add_parser("gen-twi", help="generate word-intrusion tasks")
    add_common(p)
    p.add_argument("--models-dir", dest="models_dir", default=S)
    p.add_argument("--vocab", default=S,
                   help="vocab.json from ingest (provides corpus frequencies)")
    p.add_argument("--embeddings", default=S)
    p.add_argument("--sampling", default=S, help="paper | all | fraction=F")
    p.add_argument("--controls", type=int, default=S)
    p.add_argument("--n-tracks", dest="n_tracks", type=int, default=S)
    p.add_argument("--format", choices=["native-json", "labelstudio-json"], default=S)

    p = sub.add_parser("gen-twm", help="generate word-mixing tasks")
    add_common(p)
    p.add_argument("--models-dir", dest="models_dir", default=S)
    p.add_argument("--embeddings", default=S)
    p.add_argument("--metrics-dir", dest="metrics_dir", default=S,
                   help="metrics output dir; used to pick control topics")
    p.add_argument("--sampling", default=S)
    p.add_argument("--controls", type=int, default=S)
    p.add_argument("--n-tracks", dest="n_tracks", type=int, default=S)
    p.add_argument("--format", choices=["native-json", "labelstudio-json"], default=S)
    p.add_argument("--topic-embed-topn", dest="topic_embed_topn", type=int, default=S)

    p = sub.add_parser("export", help="re-export an existing bundle")
    add_common(p)
    p.add_argument("--bundle", default=S)
    p.add_argument("--key", default=S)
    p.add_argument("--format", choices=["native-json", "labelstudio-json"], default=S)

    for name in ("score", "agreement"):
        p = sub.add_parser(name, help="score annotations against a bundle"
                           if name == "score" else "agreement statistics only")
        add_common(p)
        p.add_argument("--bundle", default=S)
        p.add_argument("--key", default=S)
        p.add_argument("--annotations", default=S)
        p.add_argument("--labelstudio", action="store_true", default=S,
                       help="annotations are a LabelStudio export")
        if name == "score":
            p.add_argument("--task-level-regression", dest="task_level_regression",
                           action="store_true", default=S)
            p.add_argument("--bootstrap", type=int, default=S)
    return parser


def _merge_params(cmd: str, provided: dict) -> dict:
    params = dict(COMMON_DEFAULTS)
    params.update(CMD_DEFAULTS[cmd])
    config_path = provided.get("config")
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            file_conf = json.load(fh)
        unknown = set(file_conf) - set(params)
        if unknown:
            raise ValidationError(f"config file has unknown keys {sorted(unknown)}")
        params.update(file_conf)
    params.update(provided)
    return params


def _require(params: dict, *names: str) -> None:
    missing = [n for n in names if not params.get(n)]
    if missing:
        raise ValidationError(
            "missing required option(s): " + ", ".join(f"--{n.replace('_', '-')}"
                                                       for n in missing))


def _provenance(params: dict) -> dict:
    return {
        "version": __version__,
        "seed": params["seed"],
        "config": {k: v for k, v in sorted(params.items()) if k != "config"},
    }


def _load_counts(params: dict):
    """Vocabulary and window counts from --counts-dir or a raw corpus."""
    if params.get("counts_dir"):
        cdir = Path(params["counts_dir"])
        with open(cdir / "vocab.json", encoding="utf-8") as fh:
            vocab = Vocabulary.from_json(json.load(fh))
        counts = WindowCounts.load(cdir / "counts.npz")
        return vocab, counts
    _require(params, "corpus")
    corpus = load_corpus(params["corpus"], params["format"])
    vocab = build_vocabulary(corpus, params["min_sentence_freq"])
    counts = count_windows(corpus, vocab, params["window_size"], params["engine"])
    return vocab, counts


def cmd_ingest(params: dict) -> int:
    _require(params, "corpus")
    out = Path(params["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(params["corpus"], params["format"])
    vocab = build_vocabulary(corpus, params["min_sentence_freq"])
    counts = count_windows(corpus, vocab, params["window_size"], params["engine"])
    dump_json(vocab.to_json(), out / "vocab.json")
    counts.save(out / "counts.npz")
    dump_json({
        "provenance": _provenance(params),
        "documents": corpus.n_documents,
        "tokens": corpus.n_tokens,
        "vocabulary": len(vocab),
        "sentence_unit": vocab.sentence_unit,
        "warnings": list(vocab.warnings),
        "total_windows": counts.total_windows,
        "cooccurring_pairs": counts.n_pairs,
    }, out / "ingest.json")
    print(f"ingested {corpus.n_documents} documents, {corpus.n_tokens} tokens; "
          f"vocabulary {len(vocab)}, {counts.total_windows} windows -> {out}")
    return 0


def cmd_metrics(params: dict) -> int:
    _require(params, "models_dir")
    models = load_models_dir(params["models_dir"])
    vocab, counts = _load_counts(params)
    cfg = CoherenceConfig(
        top_n=params["top_n"],
        window_size=counts.window_size,
        epsilon=params["epsilon"],
        include_self=not params["exclude_self"],
    )
    out = Path(params["out_dir"]) / "metrics"
    out.mkdir(parents=True, exist_ok=True)
    merged = []
    for model in models:
        report = metric_report(counts, vocab, model, cfg, params["diversity_top_n"])
        obj = report.to_json()
        obj["family"] = model.family
        obj["granularity_label"] = model.granularity_label
        obj["provenance"] = _provenance(params)
        dump_json(obj, out / f"{model.model_id}.metrics.json")
        merged.append((model.family, model.granularity_label, model.model_id,
                       report.cv_mean, report.cv_mean_rescaled, report.diversity))
        print(f"{model.model_id}: cv_mean={report.cv_mean:.4f} "
              f"diversity={report.diversity:.4f}")

    granularities = sorted({g for _, g, _, _, _, _ in merged}, key=str)
    by_family = {}
    for fam, gran, _, cv, _, td in sorted(merged):
        by_family.setdefault(fam, {})[gran] = (cv, td)
    with open(out / "merged_table.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family"]
                        + [f"coherence_{g}" for g in granularities]
                        + [f"diversity_{g}" for g in granularities])
        for fam in sorted(by_family):
            cells = by_family[fam]
            writer.writerow(
                [fam]
                + [f"{cells[g][0]:.4f}" if g in cells else "" for g in granularities]
                + [f"{cells[g][1]:.4f}" if g in cells else "" for g in granularities])
    print(f"wrote {len(merged)} report(s) -> {out}")
    return 0


def _load_per_topic_cv(metrics_dir, model_id):
    if not metrics_dir:
        return None
    path = Path(metrics_dir) / f"{model_id}.metrics.json"
    if not path.exists():
        logger.warning("no metrics report for %s under %s", model_id, metrics_dir)
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)["per_topic_cv"]


def cmd_gen_twi(params: dict) -> int:
    _require(params, "models_dir", "vocab")
    models = load_models_dir(params["models_dir"])
    with open(params["vocab"], encoding="utf-8") as fh:
        vocab = Vocabulary.from_json(json.load(fh))
    table = load_embeddings(params["embeddings"]) if params.get("embeddings") else None
    plan = SamplingPlan.parse(params["sampling"])
    seed = params["seed"]
    tasks = []
    skipped = []
    for model in models:
        result = gen_twi(model, vocab, plan, params["controls"], seed, table)
        tasks.extend(result.tasks)
        skipped.extend((model.model_id, k, reason) for k, reason in result.skipped)
    bundle = assemble_bundle(tasks, params["n_tracks"], child_seed(seed, "bundle", "twi"))
    out = Path(params["out_dir"]) / "twi"
    meta = _provenance(params)
    meta["kind"] = "twi"
    meta["skipped"] = [list(s) for s in skipped]
    written = write_bundle_files_from(bundle, params["format"], out, meta)
    print(f"twi bundle {bundle.bundle_id}: {len(tasks)} tasks "
          f"({sum(1 for t in tasks if t.is_control)} controls), "
          f"{len(skipped)} skipped -> {written[0]}")
    return 0


def cmd_gen_twm(params: dict) -> int:
    _require(params, "models_dir", "embeddings")
    models = load_models_dir(params["models_dir"])
    table = load_embeddings(params["embeddings"])
    plan = SamplingPlan.parse(params["sampling"])
    seed = params["seed"]
    tasks = []
    notes = []
    for model in models:
        per_topic_cv = _load_per_topic_cv(params.get("metrics_dir"), model.model_id)
        result = gen_twm(model, table, plan, params["controls"], seed,
                         per_topic_cv, params["topic_embed_topn"])
        tasks.extend(result.tasks)
        notes.extend(f"{model.model_id}: {n}" for n in result.notes)
        notes.extend(f"{model.model_id}: substituted pair {i}-{j}"
                     for i, j in result.substitutions)
    bundle = assemble_bundle(tasks, params["n_tracks"], child_seed(seed, "bundle", "twm"))
    out = Path(params["out_dir"]) / "twm"
    meta = _provenance(params)
    meta["kind"] = "twm"
    meta["notes"] = notes
    written = write_bundle_files_from(bundle, params["format"], out, meta)
    print(f"twm bundle {bundle.bundle_id}: {len(tasks)} tasks "
          f"({sum(1 for t in tasks if t.is_control)} controls) -> {written[0]}")
    return 0


def write_bundle_files_from(bundle, format, out_dir, meta):
    return write_bundle_files(bundle_to_json(bundle, meta), bundle.answer_key(),
                              format, out_dir)


def cmd_export(params: dict) -> int:
    _require(params, "bundle", "key")
    bundle_obj = load_bundle_file(params["bundle"])
    key_obj = load_key_file(params["key"])
    out = Path(params["out_dir"])
    written = write_bundle_files(bundle_obj, key_obj, params["format"], out)
    print(f"exported {len(written)} file(s) -> {out}")
    return 0


def _load_annotation_set(params: dict) -> AnnotationSet:
    _require(params, "bundle", "key", "annotations")
    ctx = ScoringContext.from_files(params["bundle"], params["key"])
    if params["labelstudio"]:
        return AnnotationSet.from_labelstudio_file(params["annotations"], ctx)
    return AnnotationSet.from_file(params["annotations"], ctx)


def cmd_score(params: dict) -> int:
    annotations = _load_annotation_set(params)
    report = score_report(
        annotations,
        seed=params["seed"],
        n_boot=params["bootstrap"],
        task_level_regression=params["task_level_regression"],
    )
    report["provenance"] = _provenance(params)
    out = Path(params["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    dump_json(report, out / "score_report.json")
    with open(out / "score_report.csv", "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(report_to_csv_rows(report))
    for kind in ("twi", "twm"):
        block = report.get(kind)
        if not block:
            continue
        agreement = block["agreement"]
        kappa = agreement["fleiss_kappa"]["kappa"]
        kappa_text = "undefined" if kappa is None else f"{kappa:.3f}"
        percent = agreement["percent"]["value"]
        percent_text = "undefined" if percent is None else f"{percent:.3f}"
        print(f"{kind}: {block['n_tasks']} tasks, {block['n_annotations']} "
              f"annotations; agreement {percent_text}, kappa {kappa_text}")
        for fam, entry in block["per_family"].items():
            print(f"  {fam}: {entry['value']:.3f} "
                  f"[{entry['ci_low']:.3f}, {entry['ci_high']:.3f}]")
    print(f"report -> {out / 'score_report.json'}")
    return 0


def cmd_agreement(params: dict) -> int:
    annotations = _load_annotation_set(params)
    from .scoring import fleiss_kappa, percent_agreement
    out = {"provenance": _provenance(params)}
    kinds = sorted({annotations.ctx.tasks[r.task_id].kind
                    for r in annotations.records})
    for kind in kinds:
        if not annotations.scored(kind):
            continue
        out[kind] = {
            "percent": percent_agreement(annotations, kind),
            "fleiss_kappa": fleiss_kappa(annotations, kind),
        }
        kappa = out[kind]["fleiss_kappa"]["kappa"]
        kappa_text = "undefined" if kappa is None else f"{kappa:.3f}"
        print(f"{kind}: percent {out[kind]['percent']['value']:.3f}, "
              f"kappa {kappa_text}")
    outdir = Path(params["out_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    dump_json(out, outdir / "agreement.json")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "metrics": cmd_metrics,
    "gen-twi": cmd_gen_twi,
    "gen-twm": cmd_gen_twm,
    "export": cmd_export,
    "score": cmd_score,
    "agreement": cmd_agreement,
}


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s",
                        level=logging.INFO, stream=sys.stderr)
    parser = _build_parser()
    ns = parser.parse_args(argv)
    cmd = ns.cmd
    provided = {k: v for k, v in vars(ns).items() if k != "cmd"}
    try:
        params = _merge_params(cmd, provided)
        return COMMANDS[cmd](params)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (InvariantError, AssertionError) as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

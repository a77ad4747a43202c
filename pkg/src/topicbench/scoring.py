"""Scoring of returned annotations: accuracy and macro F1 with bootstrap
confidence intervals, inter-annotator agreement, and the intruder
similarity difficulty regression with residual-adjusted family scores.

Aggregation conventions (also recorded in report metadata): a task's
accuracy is the mean correctness over its annotators; a model's score is
the unweighted mean over its tasks; a family's score is the unweighted
mean over the family's tasks. Macro F1 pools every annotation of a scope
as one prediction. Control tasks never enter scores; they feed a separate
attentiveness block. 95% CIs use a seeded task-level nonparametric
bootstrap (B=2000, percentile, widened if needed to contain the point
estimate).
"""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from .errors import ValidationError
from .seeding import derive_rng
from .taskgen import SCHEMA_VERSION, TaskBundle, bundle_to_json, load_bundle_file, \
    load_key_file

logger = logging.getLogger(__name__)

DEFAULT_BOOTSTRAP = 2000


@dataclass(frozen=True)
class TaskInfo:
    task_id: str
    kind: str
    model_id: str
    family: str
    words: tuple  # shown words in presentation order
    is_control: bool
    gold: object  # intruder word (twi) or class label (twm)
    intruder_similarity: float = None
    track: int = None


class ScoringContext:
    """Joined view of a bundle and its sealed key, indexed by task_id."""

    def __init__(self, tasks: dict):
        self.tasks = tasks

    @classmethod
    def from_objects(cls, bundle_obj: dict, key_obj: dict) -> "ScoringContext":
        tasks = {}
        for task in bundle_obj["tasks"]:
            tid = task["task_id"]
            if tid not in key_obj:
                raise ValidationError(f"task {tid!r} missing from key file")
            entry = key_obj[tid]
            if entry["kind"] != task["kind"]:
                raise ValidationError(f"task {tid!r}: kind mismatch bundle vs key")
            words = tuple(w["w"] for w in task["words"])
            if task["kind"] == "twi":
                gold = entry["intruder"]
                if gold not in words or words.index(gold) != entry["intruder_position"]:
                    raise ValidationError(f"task {tid!r}: key does not match bundle words")
            else:
                gold = int(entry["label"])
            tasks[tid] = TaskInfo(
                task_id=tid,
                kind=task["kind"],
                model_id=task["model_id"],
                family=entry.get("family", task["model_id"]),
                words=words,
                is_control=bool(entry["is_control"]),
                gold=gold,
                intruder_similarity=entry.get("intruder_similarity"),
                track=task["track"],
            )
        extra = set(key_obj) - set(tasks)
        if extra:
            raise ValidationError(f"key file has {len(extra)} task(s) not in bundle")
        return cls(tasks)

    @classmethod
    def from_files(cls, bundle_path, key_path) -> "ScoringContext":
        return cls.from_objects(load_bundle_file(bundle_path), load_key_file(key_path))

    @classmethod
    def from_bundle(cls, bundle: TaskBundle) -> "ScoringContext":
        return cls.from_objects(bundle_to_json(bundle), bundle.answer_key())


@dataclass(frozen=True)
class Annotation:
    task_id: str
    annotator_id: str
    response: object


def _coerce_twm_response(value, where: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{where}: invalid class label {value!r}")
    if isinstance(value, int) and value in (1, 2):
        return value
    if isinstance(value, str) and value in ("1", "2"):
        return int(value)
    raise ValidationError(f"{where}: invalid class label {value!r}")


class AnnotationSet:
    """Validated annotator responses bound to one scoring context."""

    def __init__(self, records, ctx: ScoringContext):
        seen = set()
        validated = []
        for i, rec in enumerate(records):
            where = f"annotation record {i}"
            tid = rec.task_id
            info = ctx.tasks.get(tid)
            if info is None:
                raise ValidationError(f"{where}: unknown task_id {tid!r}")
            pair = (tid, rec.annotator_id)
            if pair in seen:
                raise ValidationError(
                    f"{where}: duplicate response by {rec.annotator_id!r} on {tid!r}")
            seen.add(pair)
            if info.kind == "twi":
                if rec.response not in info.words:
                    raise ValidationError(
                        f"{where}: response {rec.response!r} is not among the "
                        f"shown words of {tid!r}")
                validated.append(rec)
            else:
                validated.append(Annotation(tid, rec.annotator_id,
                                            _coerce_twm_response(rec.response, where)))
        self.records = tuple(validated)
        self.ctx = ctx

    @classmethod
    def from_json_obj(cls, obj, ctx: ScoringContext) -> "AnnotationSet":
        if isinstance(obj, dict):
            if "records" not in obj:
                raise ValidationError("annotation object lacks 'records'")
            rows = obj["records"]
        elif isinstance(obj, list):
            rows = obj
        else:
            raise ValidationError("annotation JSON must be a list or object")
        records = []
        for i, row in enumerate(rows):
            for key in ("task_id", "annotator_id", "response"):
                if key not in row:
                    raise ValidationError(f"annotation record {i}: missing {key!r}")
            records.append(Annotation(str(row["task_id"]), str(row["annotator_id"]),
                                      row["response"]))
        return cls(records, ctx)

    @classmethod
    def from_file(cls, path, ctx: ScoringContext) -> "AnnotationSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh), ctx)

    @classmethod
    def from_labelstudio_file(cls, path, ctx: ScoringContext) -> "AnnotationSet":
        """Map a LabelStudio JSON export (choices interface) to records."""
        with open(path, encoding="utf-8") as fh:
            items = json.load(fh)
        records = []
        for item in items:
            tid = item.get("data", {}).get("task_id")
            if tid is None:
                raise ValidationError("labelstudio item lacks data.task_id")
            for ann in item.get("annotations", []):
                result = ann.get("result", [])
                if not result:
                    continue
                choices = result[0].get("value", {}).get("choices", [])
                if not choices:
                    continue
                records.append(Annotation(str(tid), str(ann.get("completed_by")),
                                          choices[0]))
        return cls(records, ctx)

    def scored(self, kind: str):
        """Non-control records of one task kind."""
        return [r for r in self.records
                if self.ctx.tasks[r.task_id].kind == kind
                and not self.ctx.tasks[r.task_id].is_control]

    def controls(self, kind: str):
        return [r for r in self.records
                if self.ctx.tasks[r.task_id].kind == kind
                and self.ctx.tasks[r.task_id].is_control]


def _is_correct(rec: Annotation, info: TaskInfo) -> int:
    return int(rec.response == info.gold)


def _canonical(records):
    return sorted(records, key=lambda r: (r.task_id, r.annotator_id))


def _by_task(records):
    grouped = defaultdict(list)
    for r in records:
        grouped[r.task_id].append(r)
    # canonical order: results are exactly invariant to input record order
    return {tid: sorted(recs, key=lambda r: r.annotator_id)
            for tid, recs in sorted(grouped.items())}


def _bootstrap_ci(per_task_values, point: float, seed: int, labels,
                  n_boot: int = DEFAULT_BOOTSTRAP):
    """Percentile bootstrap of a mean over tasks; degenerate cases collapse."""
    values = np.asarray(per_task_values, dtype=np.float64)
    n = len(values)
    if n == 0:
        raise ValidationError("bootstrap over zero tasks")
    if np.all(values == values[0]):
        v = float(values[0])
        return min(v, point), max(v, point)
    rng = derive_rng(seed, "bootstrap", *labels)
    idx = rng.integers(0, n, size=(n_boot, n))
    means = values[idx].mean(axis=1)
    lo, hi = np.percentile(means, [2.5, 97.5])
    return min(float(lo), point), max(float(hi), point)


def score_twi(annotations: AnnotationSet, seed: int = 0,
              n_boot: int = DEFAULT_BOOTSTRAP) -> dict:
    """Macro annotation accuracy per model and per family, with 95% CIs."""
    ctx = annotations.ctx
    records = annotations.scored("twi")
    if not records:
        raise ValidationError("no scorable twi annotations")
    by_task = _by_task(records)
    task_acc = {tid: float(np.mean([_is_correct(r, ctx.tasks[tid]) for r in recs]))
                for tid, recs in by_task.items()}
    per_scope = {"model": defaultdict(list), "family": defaultdict(list)}
    for tid, acc in task_acc.items():
        info = ctx.tasks[tid]
        per_scope["model"][info.model_id].append(acc)
        per_scope["family"][info.family].append(acc)
    out = {}
    for scope, groups in per_scope.items():
        block = {}
        for name in sorted(groups):
            vals = groups[name]
            point = float(np.mean(vals))
            lo, hi = _bootstrap_ci(vals, point, seed, ("twi", scope, name), n_boot)
            block[name] = {"value": point, "ci_low": lo, "ci_high": hi,
                           "n_tasks": len(vals)}
        out[f"per_{scope}"] = block
    out["n_tasks"] = len(task_acc)
    out["n_annotations"] = len(records)
    return out


def _macro_f1(gold, pred):
    """Unweighted mean of class-1 and class-2 F1; empty classes score 0."""
    f1s = []
    degenerate = []
    for c in (1, 2):
        tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
        denom = 2 * tp + fp + fn
        if denom == 0:
            f1s.append(0.0)
            degenerate.append(c)
        else:
            f1s.append(2 * tp / denom)
    if degenerate:
        logger.warning("macro F1: class(es) %s have no gold or predicted instances; "
                       "F1 taken as 0", degenerate)
    return float(np.mean(f1s)), degenerate


def score_twm(annotations: AnnotationSet, seed: int = 0,
              n_boot: int = DEFAULT_BOOTSTRAP) -> dict:
    """Macro F1 over pooled annotations per model/family, task bootstrap CIs."""
    ctx = annotations.ctx
    records = annotations.scored("twm")
    if not records:
        raise ValidationError("no scorable twm annotations")
    by_task = _by_task(records)
    # per-task confusion counts so bootstrap replicates resample whole tasks
    task_counts = {}
    for tid, recs in by_task.items():
        gold = [ctx.tasks[tid].gold] * len(recs)
        pred = [r.response for r in recs]
        row = np.zeros(6, dtype=np.int64)
        for g, p in zip(gold, pred):
            for ci, c in enumerate((1, 2)):
                tp = int(g == c and p == c)
                fp = int(g != c and p == c)
                fn = int(g == c and p != c)
                row[3 * ci:3 * ci + 3] += (tp, fp, fn)
        task_counts[tid] = row

    def f1_from_counts(total):
        f1s = []
        for ci in range(2):
            tp, fp, fn = total[3 * ci], total[3 * ci + 1], total[3 * ci + 2]
            denom = 2 * tp + fp + fn
            f1s.append(0.0 if denom == 0 else 2 * tp / denom)
        return float(np.mean(f1s))

    scopes = {"model": defaultdict(list), "family": defaultdict(list)}
    for tid in task_counts:
        info = ctx.tasks[tid]
        scopes["model"][info.model_id].append(tid)
        scopes["family"][info.family].append(tid)
    out = {}
    for scope, groups in scopes.items():
        block = {}
        for name in sorted(groups):
            tids = groups[name]
            gold = [ctx.tasks[t].gold for t in tids for _ in by_task[t]]
            pred = [r.response for t in tids for r in by_task[t]]
            point, degenerate = _macro_f1(gold, pred)
            counts = np.stack([task_counts[t] for t in tids])
            n = len(tids)
            if n == 1 or np.all(counts == counts[0]):
                lo = hi = point
            else:
                rng = derive_rng(seed, "bootstrap", "twm", scope, name)
                idx = rng.integers(0, n, size=(n_boot, n))
                reps = np.array([f1_from_counts(counts[row].sum(axis=0))
                                 for row in idx])
                qlo, qhi = np.percentile(reps, [2.5, 97.5])
                lo, hi = min(float(qlo), point), max(float(qhi), point)
            block[name] = {"value": point, "ci_low": lo, "ci_high": hi,
                           "n_tasks": n, "degenerate_classes": degenerate}
        out[f"per_{scope}"] = block
    out["n_tasks"] = len(task_counts)
    out["n_annotations"] = len(records)
    return out


def percent_agreement(annotations: AnnotationSet, kind: str) -> dict:
    """Mean over tasks of the fraction of agreeing annotator pairs."""
    records = annotations.scored(kind)
    by_task = _by_task(records)
    fractions = []
    excluded = 0
    for tid, recs in by_task.items():
        n = len(recs)
        if n < 2:
            excluded += 1
            continue
        agree = 0
        for i in range(n):
            for j in range(i + 1, n):
                agree += int(recs[i].response == recs[j].response)
        fractions.append(agree / (n * (n - 1) / 2))
    if excluded:
        logger.warning("percent agreement: %d task(s) with a single annotation excluded",
                       excluded)
    if not fractions:
        raise ValidationError("no task has >= 2 annotations")
    return {"value": float(np.mean(fractions)), "n_tasks": len(fractions),
            "excluded_single_annotation": excluded}


def fleiss_kappa(annotations: AnnotationSet, kind: str) -> dict:
    """Fleiss' kappa over scored tasks with the modal annotator count.

    Categories: the 5 shown positions (twi, responses mapped to their
    position in that task) or the class labels {1, 2} (twm). Tasks whose
    annotation count differs from the modal n are excluded and counted.
    """
    ctx = annotations.ctx
    by_task = _by_task(annotations.scored(kind))
    if not by_task:
        raise ValidationError(f"no scorable {kind} annotations")
    count_freq = Counter(len(recs) for recs in by_task.values())
    eligible = [(freq, n) for n, freq in count_freq.items() if n >= 2]
    if not eligible:
        return {"kappa": None, "reason": "no task has >= 2 annotations",
                "n_tasks": 0, "excluded": len(by_task)}
    _, n = max(eligible)
    items = {tid: recs for tid, recs in by_task.items() if len(recs) == n}
    excluded = len(by_task) - len(items)
    if excluded:
        logger.warning("fleiss kappa: %d task(s) excluded (annotation count != %d)",
                       excluded, n)
    n_categories = 5 if kind == "twi" else 2
    table = np.zeros((len(items), n_categories), dtype=np.int64)
    for row, (tid, recs) in enumerate(items.items()):
        info = ctx.tasks[tid]
        for rec in recs:
            if kind == "twi":
                cat = info.words.index(rec.response)
            else:
                cat = rec.response - 1
            table[row, cat] += 1
    p_i = (np.sum(table.astype(np.float64) ** 2, axis=1) - n) / (n * (n - 1))
    p_bar = float(np.mean(p_i))
    p_j = table.sum(axis=0) / (len(items) * n)
    p_e = float(np.sum(p_j ** 2))
    if p_e >= 1.0:
        return {"kappa": None, "reason": "all annotations fall in one category",
                "n_tasks": len(items), "annotators_per_task": n, "excluded": excluded}
    kappa = (p_bar - p_e) / (1.0 - p_e)
    return {"kappa": float(kappa), "n_tasks": len(items),
            "annotators_per_task": n, "excluded": excluded}


def _annotation_points(annotations: AnnotationSet, task_level: bool):
    ctx = annotations.ctx
    records = annotations.scored("twi")
    skipped = 0
    xs, ys = [], []
    if task_level:
        for tid, recs in _by_task(records).items():
            info = ctx.tasks[tid]
            if info.intruder_similarity is None:
                skipped += 1
                continue
            xs.append(info.intruder_similarity)
            ys.append(float(np.mean([_is_correct(r, info) for r in recs])))
    else:
        for rec in _canonical(records):
            info = ctx.tasks[rec.task_id]
            if info.intruder_similarity is None:
                skipped += 1
                continue
            xs.append(info.intruder_similarity)
            ys.append(float(_is_correct(rec, info)))
    if skipped:
        logger.warning("difficulty regression: %d point(s) without intruder "
                       "similarity skipped", skipped)
    if not xs:
        raise ValidationError("no annotation has an intruder similarity")
    return np.asarray(xs), np.asarray(ys), skipped


def difficulty_regression(annotations: AnnotationSet,
                          task_level: bool = False) -> dict:
    """OLS of correctness on intruder-to-head similarity, plus Pearson r
    and its two-sided t-test p-value."""
    x, y, skipped = _annotation_points(annotations, task_level)
    n = len(x)
    if np.all(x == x[0]):
        raise ValidationError("zero variance in intruder similarity")
    warning = None
    if np.all(y == y[0]):
        slope, intercept = 0.0, float(y[0])
        r, p_value = 0.0, 1.0
        warning = "zero variance in correctness; r reported as 0"
        logger.warning("difficulty regression: %s", warning)
    else:
        x_mean, y_mean = float(np.mean(x)), float(np.mean(y))
        sxx = float(np.sum((x - x_mean) ** 2))
        syy = float(np.sum((y - y_mean) ** 2))
        sxy = float(np.sum((x - x_mean) * (y - y_mean)))
        slope = sxy / sxx
        intercept = y_mean - slope * x_mean
        r = sxy / np.sqrt(sxx * syy)
        if n < 3:
            p_value = None
            warning = "fewer than 3 points; p-value undefined"
        elif 1.0 - r * r <= 0.0:
            p_value = 0.0
        else:
            t = r * np.sqrt((n - 2) / (1.0 - r * r))
            p_value = float(2.0 * _scipy_stats.t.sf(abs(t), n - 2))
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "pearson_r": float(r),
        "p_value": p_value,
        "n_points": n,
        "unit": "task" if task_level else "annotation",
        "skipped_points": skipped,
        "warning": warning,
    }


def adjust_scores(regression: dict, annotations: AnnotationSet) -> dict:
    """Residual-adjusted family accuracies.

    adjusted(family) = grand mean correctness + mean residual of the
    family's annotations; the annotation-weighted mean of adjusted scores
    equals the grand mean because OLS residuals sum to zero.
    """
    ctx = annotations.ctx
    records = annotations.scored("twi")
    slope, intercept = regression["slope"], regression["intercept"]
    per_family = defaultdict(list)
    all_correct = []
    for rec in _canonical(records):
        info = ctx.tasks[rec.task_id]
        if info.intruder_similarity is None:
            continue
        correct = _is_correct(rec, info)
        residual = correct - (intercept + slope * info.intruder_similarity)
        per_family[info.family].append(residual)
        all_correct.append(correct)
    if not all_correct:
        raise ValidationError("no annotations usable for adjustment")
    grand = float(np.mean(all_correct))
    return {family: grand + float(np.mean(res))
            for family, res in sorted(per_family.items())}


def control_report(annotations: AnnotationSet, kind: str) -> dict:
    """Attentiveness: per-annotator accuracy on control tasks."""
    ctx = annotations.ctx
    per_annotator = defaultdict(list)
    for rec in _canonical(annotations.controls(kind)):
        per_annotator[rec.annotator_id].append(_is_correct(rec, ctx.tasks[rec.task_id]))
    return {
        "per_annotator": {a: {"accuracy": float(np.mean(v)), "n": len(v)}
                          for a, v in sorted(per_annotator.items())},
        "n_control_annotations": sum(len(v) for v in per_annotator.values()),
    }


def score_report(annotations: AnnotationSet, seed: int = 0,
                 n_boot: int = DEFAULT_BOOTSTRAP,
                 task_level_regression: bool = False) -> dict:
    """Full report over whatever task kinds the annotation set contains."""
    report = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "metadata": {
            "ci": f"task-level nonparametric bootstrap, B={n_boot}, percentile, "
                  "widened to contain the point estimate",
            "macro_accuracy": "mean over annotators per task, over tasks per scope",
            "macro_f1": "every annotation is one prediction; unweighted mean of "
                        "class-1 and class-2 F1",
            "agreement": "pairwise percent agreement over non-control tasks",
            "regression_unit": "task" if task_level_regression else "annotation",
            "controls": "excluded from all scores; reported separately",
        },
    }
    kinds = sorted({annotations.ctx.tasks[r.task_id].kind for r in annotations.records})
    for kind in kinds:
        if not annotations.scored(kind):
            continue
        block = {}
        if kind == "twi":
            block.update(score_twi(annotations, seed, n_boot))
        else:
            block.update(score_twm(annotations, seed, n_boot))
        try:
            percent = percent_agreement(annotations, kind)
        except ValidationError as exc:
            percent = {"value": None, "error": str(exc)}
            logger.warning("agreement block for %s: %s", kind, exc)
        block["agreement"] = {
            "percent": percent,
            "fleiss_kappa": fleiss_kappa(annotations, kind),
        }
        if kind == "twi":
            try:
                regression = difficulty_regression(annotations, task_level_regression)
                block["difficulty"] = dict(
                    regression,
                    adjusted_per_family=adjust_scores(regression, annotations),
                )
            except ValidationError as exc:
                block["difficulty"] = {"error": str(exc)}
                logger.warning("difficulty block skipped: %s", exc)
        block["controls"] = control_report(annotations, kind)
        report[kind] = block
    return report


def report_to_csv_rows(report: dict) -> list:
    """Flatten per-scope scores for plotting; returns header + rows."""
    rows = [("kind", "scope", "name", "metric", "value", "ci_low", "ci_high")]
    for kind, metric in (("twi", "accuracy"), ("twm", "macro_f1")):
        block = report.get(kind)
        if not block:
            continue
        for scope in ("model", "family"):
            for name, entry in block[f"per_{scope}"].items():
                rows.append((kind, scope, name, metric, entry["value"],
                             entry["ci_low"], entry["ci_high"]))
        adjusted = block.get("difficulty", {}).get("adjusted_per_family", {})
        for name, value in adjusted.items():
            rows.append((kind, "family", name, "adjusted_accuracy", value, "", ""))
    return rows

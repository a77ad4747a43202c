"""Annotation-task generation: word-intrusion (TWI) and word-mixing (TWM)
tasks, campaign sampling, control injection, track assembly, and export.

Construction rules
------------------
TWI: 5 shown words = a topic's top-4 plus one intruder drawn from the
topic's lower 50% that ranks in the top 10% of some other topic, with
corpus frequency inside a multiplicative band around the geometric mean
frequency of the head (band widens 2 -> 4 -> 8 before giving up).

TWM: 8 shown words, 4 bolded. Two-topic tasks join the top-4 of a
confusable pair (bold marks one topic, coin-flipped); one-topic tasks
show a topic's top-8 with 4 random bolds. Per model, the two classes are
generated in equal numbers.

Sampling: the campaign plan includes every topic (pair) at granularity
10 and a 60% (TWI) / 50% (TWM) random sample at 25/50.

All randomness is split from one master seed per (operation, model,
item) label path; regeneration is byte-identical. Exported annotator
files never contain intruder positions, class labels, or control flags;
those live in a separate sealed key file.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .corpus import Vocabulary
from .embeddings import EmbeddingTable, cosine, intruder_head_similarity, \
    most_similar_pairs, pairwise_topic_similarities
from .errors import TopicBenchError, ValidationError
from .model_io import RANK_FLOOR, TopicModel, TopicRef, top_words
from .seeding import HashRng

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

#: keys that must never appear in an annotator-facing file
KEY_FIELDS = frozenset({
    "intruder_position", "intruder", "label", "y", "is_control",
    "answer_key", "head_words", "intruder_similarity",
})

RHO_SCHEDULE = (2.0, 4.0, 8.0)


class NoIntruderCandidate(TopicBenchError):
    """No word satisfies the intruder constraints; the task is skipped."""


@dataclass(frozen=True)
class SamplingPlan:
    """Fraction of topics (TWI) or candidate pairs (TWM) to include."""

    mode: str  # "paper" | "all" | "fraction"
    fraction: Fraction = None

    _PAPER = {
        "twi": {"10": Fraction(1), "25": Fraction(3, 5), "50": Fraction(3, 5)},
        "twm": {"10": Fraction(1), "25": Fraction(1, 2), "50": Fraction(1, 2)},
    }

    @classmethod
    def parse(cls, text: str) -> "SamplingPlan":
        if text == "paper":
            return cls(mode="paper")
        if text == "all":
            return cls(mode="all")
        if text.startswith("fraction="):
            frac = Fraction(text.removeprefix("fraction=")).limit_denominator(10**6)
            if not 0 < frac <= 1:
                raise ValidationError("sampling fraction must be in (0, 1]")
            return cls(mode="fraction", fraction=frac)
        raise ValidationError(f"unknown sampling plan {text!r}")

    def fraction_for(self, kind: str, granularity_label: str) -> Fraction:
        if self.mode == "all":
            return Fraction(1)
        if self.mode == "fraction":
            return self.fraction
        table = self._PAPER[kind]
        if granularity_label not in table:
            raise ValidationError(
                f"paper sampling plan has no bucket {granularity_label!r} "
                "(expected one of 10/25/50)")
        return table[granularity_label]

    def describe(self) -> str:
        if self.mode == "fraction":
            return f"fraction={self.fraction}"
        return self.mode


def sample_count(fraction: Fraction, total: int) -> int:
    """round(fraction * total) with exact rational arithmetic, half up."""
    frac = Fraction(fraction)
    return int((2 * frac.numerator * total + frac.denominator)
               // (2 * frac.denominator))


@dataclass(frozen=True)
class TwiTask:
    task_id: str
    model_id: str
    family: str
    topic: TopicRef
    shown_words: tuple  # 5 words
    intruder_position: int  # hidden key
    head_words: tuple  # 4 words
    is_control: bool = False
    intruder_similarity: float = None
    rho_used: float = None

    def __post_init__(self):
        if len(self.shown_words) != 5 or len(self.head_words) != 4:
            raise ValidationError(f"task {self.task_id}: needs 4 head + 1 intruder")
        if sorted(self.shown_words) != sorted(self.head_words + (self.intruder,)):
            raise ValidationError(
                f"task {self.task_id}: shown words are not head + intruder")
        if self.intruder in self.head_words:
            raise ValidationError(f"task {self.task_id}: intruder is a head word")

    @property
    def kind(self) -> str:
        return "twi"

    @property
    def intruder(self) -> str:
        return self.shown_words[self.intruder_position]


@dataclass(frozen=True)
class TwmTask:
    task_id: str
    model_id: str
    family: str
    topics: tuple  # 1 or 2 TopicRefs
    shown_words: tuple  # 8 (word, bold) pairs
    label: int  # hidden key: 1 or 2
    is_control: bool = False

    def __post_init__(self):
        if len(self.shown_words) != 8:
            raise ValidationError(f"task {self.task_id}: needs exactly 8 words")
        if sum(1 for _, bold in self.shown_words if bold) != 4:
            raise ValidationError(f"task {self.task_id}: needs exactly 4 bold words")
        if self.label not in (1, 2):
            raise ValidationError(f"task {self.task_id}: label must be 1 or 2")
        if len(self.topics) != self.label:
            raise ValidationError(
                f"task {self.task_id}: label {self.label} with {len(self.topics)} topics")
        words = [w for w, _ in self.shown_words]
        if len(set(words)) != 8:
            raise ValidationError(f"task {self.task_id}: shown words repeat")

    @property
    def kind(self) -> str:
        return "twm"


@dataclass(frozen=True)
class TwiGenResult:
    tasks: tuple
    skipped: tuple  # (topic_index, reason)
    relaxations: dict  # rho -> count of tasks needing that band


@dataclass(frozen=True)
class TwmGenResult:
    tasks: tuple
    substitutions: tuple  # pairs swapped in for overlapping top-4 sets
    notes: tuple = ()


@dataclass(frozen=True)
class TaskBundle:
    bundle_id: str
    seed: int
    tasks: tuple  # TwiTask | TwmTask, in presentation order
    tracks: tuple  # per track: tuple of task_ids
    n_tracks: int

    def answer_key(self) -> dict:
        key = {}
        for t in self.tasks:
            if t.kind == "twi":
                key[t.task_id] = {
                    "kind": "twi",
                    "model_id": t.model_id,
                    "family": t.family,
                    "topic_index": t.topic.topic_index,
                    "intruder_position": t.intruder_position,
                    "intruder": t.intruder,
                    "head_words": list(t.head_words),
                    "is_control": t.is_control,
                    "intruder_similarity": t.intruder_similarity,
                    "rho_used": t.rho_used,
                }
            else:
                key[t.task_id] = {
                    "kind": "twm",
                    "model_id": t.model_id,
                    "family": t.family,
                    "topic_indices": [r.topic_index for r in t.topics],
                    "label": t.label,
                    "is_control": t.is_control,
                }
        return key

    def track_of(self) -> dict:
        return {tid: i for i, track in enumerate(self.tracks) for tid in track}


def _check_rank_floor(model: TopicModel) -> None:
    short = [k for k in range(model.K) if model.ranking_length(k) < RANK_FLOOR]
    if short:
        raise ValidationError(
            f"model {model.model_id!r}: topics {short} have rankings shorter than "
            f"{RANK_FLOOR} words; rank constraints would be degenerate")


def _geometric_mean_freq(words, vocab: Vocabulary):
    freqs = [vocab.corpus_freq[w] for w in words if w in vocab.corpus_freq]
    if not freqs:
        return None
    return math.exp(sum(math.log(f) for f in freqs) / len(freqs))


@dataclass(frozen=True)
class IntruderChoice:
    word: str
    rho_used: float
    n_candidates: int


def select_intruder(model: TopicModel, topic_index: int, vocab: Vocabulary,
                    seed: int, rho_schedule=RHO_SCHEDULE) -> IntruderChoice:
    """Draw one intruder for a topic under the three construction rules.

    (a) strictly below the topic's own median rank (percentile > 0.5);
    (b) within the top 10% of at least one other topic;
    (c) corpus frequency within [g/rho, g*rho] of the head's geometric
        mean frequency g, widening rho along ``rho_schedule``.
    """
    _check_rank_floor(model)
    head = top_words(model, topic_index, 4)
    gmean = _geometric_mean_freq(head, vocab)
    if gmean is None:
        raise NoIntruderCandidate(
            f"topic {topic_index}: no head word has a corpus frequency")
    ranking = model.topics[topic_index]
    length = len(ranking)
    lower_half = [w for pos, w in enumerate(ranking, 1) if pos / length > 0.5]
    top10_elsewhere = set()
    for j in range(model.K):
        if j == topic_index:
            continue
        cut = int(0.10 * model.ranking_length(j))  # percentile <= 0.10
        top10_elsewhere.update(model.topics[j][:cut])
    base = [w for w in lower_half
            if w in top10_elsewhere and w in vocab.corpus_freq]
    for rho in rho_schedule:
        candidates = [w for w in base
                      if gmean / rho <= vocab.corpus_freq[w] <= gmean * rho]
        if candidates:
            if rho != rho_schedule[0]:
                logger.info("topic %s#%d: frequency band relaxed to rho=%g",
                            model.model_id, topic_index, rho)
            rng = HashRng(seed, "intruder", model.model_id, topic_index)
            return IntruderChoice(word=candidates[rng.below(len(candidates))],
                                  rho_used=rho, n_candidates=len(candidates))
    raise NoIntruderCandidate(
        f"topic {topic_index}: no intruder candidate after relaxing to "
        f"rho={rho_schedule[-1]} ({len(base)} words met the rank constraints)")


def _frequent_words(vocab: Vocabulary, top_fraction: float = 0.05) -> list:
    ordered = sorted(vocab.words, key=lambda w: (-vocab.corpus_freq[w], w))
    n = max(1, int(top_fraction * len(ordered)))
    return ordered[:n]


def _salient_intruder(model: TopicModel, topic_index: int, vocab: Vocabulary,
                      table: EmbeddingTable = None) -> str:
    """Control-task intruder: frequent and far from the head.

    With embeddings: the top-5%-frequency word minimizing mean cosine to
    the head. Without: the most frequent word outside the topic's upper
    half.
    """
    head = top_words(model, topic_index, 4)
    if table is not None:
        frequent = [w for w in _frequent_words(vocab)
                    if w not in head and w in table.vec_of]
        head_vecs = [table.vec_of[w] for w in head if w in table.vec_of]
        if frequent and head_vecs:
            def mean_cos(w):
                v = table.vec_of[w]
                return sum(cosine(hv, v) for hv in head_vecs) / len(head_vecs)
            return min(frequent, key=lambda w: (mean_cos(w), w))
    ranking = model.topics[topic_index]
    length = len(ranking)
    upper = set(ranking[: length // 2])  # percentile <= 0.5
    for w in sorted(vocab.words, key=lambda w: (-vocab.corpus_freq[w], w)):
        if w not in upper and w not in head:
            return w
    raise NoIntruderCandidate(
        f"topic {topic_index}: no salient control intruder available")


def _sampled_topics(model: TopicModel, plan: SamplingPlan, kind: str,
                    seed: int) -> list:
    frac = plan.fraction_for(kind, model.granularity_label)
    n = sample_count(frac, model.K)
    if n >= model.K:
        return list(range(model.K))
    rng = HashRng(seed, kind, model.model_id, "topic-sample")
    return sorted(rng.sample(model.K, n))


def gen_twi(model: TopicModel, vocab: Vocabulary, sampling: SamplingPlan,
            controls_per_model: int, seed: int,
            table: EmbeddingTable = None) -> TwiGenResult:
    """One intrusion task per sampled topic, plus salient-intruder controls."""
    _check_rank_floor(model)
    topic_indices = _sampled_topics(model, sampling, "twi", seed)
    tasks = []
    skipped = []
    relaxations = {}

    def build(topic_index, intruder, task_id, is_control, rho_used):
        head = tuple(top_words(model, topic_index, 4))
        shown = list(head) + [intruder]
        HashRng(seed, "twi", model.model_id, task_id, "shuffle").shuffle(shown)
        similarity = None
        if table is not None:
            try:
                similarity = intruder_head_similarity(head, intruder, table)
            except ValidationError:
                logger.warning("task %s: embeddings do not cover intruder/head; "
                               "similarity left empty", task_id)
        return TwiTask(
            task_id=task_id,
            model_id=model.model_id,
            family=model.family,
            topic=model.ref(topic_index),
            shown_words=tuple(shown),
            intruder_position=shown.index(intruder),
            head_words=head,
            is_control=is_control,
            intruder_similarity=similarity,
            rho_used=rho_used,
        )

    for k in topic_indices:
        try:
            choice = select_intruder(model, k, vocab, seed)
        except NoIntruderCandidate as exc:
            logger.warning("twi: %s", exc)
            skipped.append((k, str(exc)))
            continue
        relaxations[choice.rho_used] = relaxations.get(choice.rho_used, 0) + 1
        tasks.append(build(k, choice.word, f"{model.model_id}:twi:t{k:03d}",
                           False, choice.rho_used))

    control_rng = HashRng(seed, "twi", model.model_id, "control-topics")
    for c in range(controls_per_model):
        k = topic_indices[control_rng.below(len(topic_indices))]
        try:
            intruder = _salient_intruder(model, k, vocab, table)
        except NoIntruderCandidate as exc:
            skipped.append((k, f"control: {exc}"))
            continue
        tasks.append(build(k, intruder, f"{model.model_id}:twi:ctl{c}", True, None))

    return TwiGenResult(tasks=tuple(tasks), skipped=tuple(skipped),
                        relaxations=relaxations)


def _full_pair_table(model: TopicModel, table: EmbeddingTable, top_n: int = 50):
    """All unordered topic pairs sorted by similarity descending."""
    sim = pairwise_topic_similarities(model, table, top_n)
    pairs = [(i, j, float(sim[i, j]))
             for i in range(model.K) for j in range(i + 1, model.K)]
    pairs.sort(key=lambda p: (-p[2], p[0], p[1]))
    return pairs


def gen_twm(model: TopicModel, table: EmbeddingTable, sampling: SamplingPlan,
            controls_per_model: int, seed: int, per_topic_cv=None,
            pair_top_n: int = 50) -> TwmGenResult:
    """Balanced one-topic/two-topic mixing tasks over confusable pairs."""
    if model.K < 2:
        raise ValidationError("gen_twm requires K >= 2")
    for k in range(model.K):
        if model.ranking_length(k) < 8:
            raise ValidationError(
                f"model {model.model_id!r}: topic {k} has fewer than 8 words")
    top4 = {k: tuple(top_words(model, k, 4)) for k in range(model.K)}

    msp = most_similar_pairs(model, table, pair_top_n)
    candidates = []
    rejected = []
    for a, b, s in msp:
        i, j = a.topic_index, b.topic_index
        if set(top4[i]) & set(top4[j]):
            rejected.append((i, j))
        else:
            candidates.append((i, j, s))
    substitutions = []
    if rejected:
        have = {(i, j) for i, j, _ in candidates}
        for i, j, s in _full_pair_table(model, table, pair_top_n):
            if len(candidates) >= len(msp):
                break
            if (i, j) in have or (set(top4[i]) & set(top4[j])):
                continue
            candidates.append((i, j, s))
            have.add((i, j))
            substitutions.append((i, j))
        candidates.sort(key=lambda p: (-p[2], p[0], p[1]))
        logger.warning("twm %s: %d overlapping pair(s) replaced by next-most-similar",
                       model.model_id, len(substitutions))

    frac = sampling.fraction_for("twm", model.granularity_label)
    n_mixed = sample_count(frac, len(candidates))
    if n_mixed == 0:
        raise ValidationError(
            f"model {model.model_id!r}: sampling leaves no mixed task")
    if n_mixed >= len(candidates):
        selected = candidates
    else:
        rng = HashRng(seed, "twm", model.model_id, "pair-sample")
        picked = sorted(rng.sample(len(candidates), n_mixed))
        selected = [candidates[i] for i in picked]

    tasks = []
    notes = []

    def build_mixed(i, j, task_id, is_control):
        bold_first = HashRng(seed, "twm", model.model_id, task_id, "bold").coin()
        bold_topic = i if bold_first else j
        words = [(w, k == bold_topic)
                 for k in (i, j) for w in top4[k]]
        HashRng(seed, "twm", model.model_id, task_id, "shuffle").shuffle(words)
        return TwmTask(
            task_id=task_id,
            model_id=model.model_id,
            family=model.family,
            topics=(model.ref(i), model.ref(j)),
            shown_words=tuple(words),
            label=2,
            is_control=is_control,
        )

    def build_single(k, task_id, is_control):
        words8 = top_words(model, k, 8)
        rng = HashRng(seed, "twm", model.model_id, task_id, "bold")
        bold_at = set(rng.sample(8, 4))
        words = [(w, p in bold_at) for p, w in enumerate(words8)]
        HashRng(seed, "twm", model.model_id, task_id, "shuffle").shuffle(words)
        return TwmTask(
            task_id=task_id,
            model_id=model.model_id,
            family=model.family,
            topics=(model.ref(k),),
            shown_words=tuple(words),
            label=1,
            is_control=is_control,
        )

    for i, j, _ in selected:
        tasks.append(build_mixed(i, j, f"{model.model_id}:twm:m{i:03d}-{j:03d}", False))

    frame = sorted({k for i, j, _ in selected for k in (i, j)})
    n_single = len(selected)
    rng = HashRng(seed, "twm", model.model_id, "single-sample")
    if n_single <= len(frame):
        chosen = [frame[i] for i in sorted(rng.sample(len(frame), n_single))]
    else:
        chosen = sorted(frame[rng.below(len(frame))] for _ in range(n_single))
        notes.append("single-topic sampling used replacement "
                     f"({n_single} tasks over {len(frame)} topics)")
    for seq, k in enumerate(chosen):
        tasks.append(build_single(k, f"{model.model_id}:twm:s{k:03d}-{seq}", False))

    # controls: easiest two-topic mix = globally least similar disjoint pair;
    # easiest one-topic = highest-coherence topic (embedding proxy without CV)
    if controls_per_model > 0:
        ascending = sorted(_full_pair_table(model, table, pair_top_n),
                           key=lambda p: (p[2], p[0], p[1]))
        easy_pair = next(((i, j) for i, j, _ in ascending
                          if not set(top4[i]) & set(top4[j])), None)
        easy_single = _easiest_topic(model, table, per_topic_cv)
        for c in range(controls_per_model):
            if easy_pair is not None:
                i, j = easy_pair
                tasks.append(build_mixed(i, j, f"{model.model_id}:twm:ctl2-{c}", True))
            else:
                notes.append("no disjoint pair for a two-topic control")
            tasks.append(build_single(easy_single, f"{model.model_id}:twm:ctl1-{c}", True))

    return TwmGenResult(tasks=tuple(tasks), substitutions=tuple(substitutions),
                        notes=tuple(notes))


def _easiest_topic(model: TopicModel, table: EmbeddingTable, per_topic_cv):
    """Topic for one-topic controls: highest coherence when CV values are
    supplied, else highest mean pairwise cosine among its top-8 vectors."""
    if per_topic_cv is not None:
        scored = [(v, k) for k, v in enumerate(per_topic_cv) if v is not None]
        if scored:
            return max(scored, key=lambda t: (t[0], -t[1]))[1]
    best_k, best_score = 0, -math.inf
    for k in range(model.K):
        vecs = [table.vec_of[w] for w in top_words(model, k, 8) if w in table.vec_of]
        if len(vecs) < 2:
            continue
        sims = [cosine(vecs[a], vecs[b])
                for a in range(len(vecs)) for b in range(a + 1, len(vecs))]
        score = sum(sims) / len(sims)
        if score > best_score:
            best_k, best_score = k, score
    return best_k


def assemble_bundle(tasks, n_tracks: int = 4, seed: int = 0) -> TaskBundle:
    """Shuffle tasks, deal them round-robin into tracks, seal the key."""
    tasks = list(tasks)
    if len(tasks) < n_tracks:
        raise ValidationError(f"{len(tasks)} task(s) cannot fill {n_tracks} tracks")
    ids = [t.task_id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate task_ids in bundle")
    order = list(range(len(tasks)))
    HashRng(seed, "bundle", "shuffle").shuffle(order)
    shuffled = [tasks[i] for i in order]
    tracks = [[] for _ in range(n_tracks)]
    for pos, task in enumerate(shuffled):
        tracks[pos % n_tracks].append(task.task_id)
    digest = hashlib.sha256(
        (str(seed) + "|" + "|".join(t.task_id for t in shuffled)).encode()).hexdigest()
    return TaskBundle(
        bundle_id=f"bundle-{digest[:12]}",
        seed=seed,
        tasks=tuple(shuffled),
        tracks=tuple(tuple(t) for t in tracks),
        n_tracks=n_tracks,
    )


def bundle_to_json(bundle: TaskBundle, extra_meta: dict = None) -> dict:
    """Annotator-facing representation; key material is stripped."""
    track_of = bundle.track_of()
    tasks = []
    for t in bundle.tasks:
        if t.kind == "twi":
            words = [{"w": w, "bold": False} for w in t.shown_words]
        else:
            words = [{"w": w, "bold": bold} for w, bold in t.shown_words]
        tasks.append({
            "task_id": t.task_id,
            "kind": t.kind,
            "model_id": t.model_id,
            "words": words,
            "track": track_of[t.task_id],
        })
    obj = {
        "schema_version": SCHEMA_VERSION,
        "bundle_id": bundle.bundle_id,
        "seed": bundle.seed,
        "n_tracks": bundle.n_tracks,
        "tasks": tasks,
    }
    if extra_meta:
        obj["meta"] = extra_meta
    assert_no_key_fields(obj)
    return obj


def assert_no_key_fields(obj) -> None:
    """Refuse any annotator-facing object that smuggles key fields."""
    stack = [obj]
    while stack:
        node = stack.pop()
        if isinstance(node, dict):
            leaked = KEY_FIELDS.intersection(node)
            if leaked:
                raise ValidationError(
                    f"annotator-facing artifact contains key field(s) {sorted(leaked)}")
            stack.extend(node.values())
        elif isinstance(node, (list, tuple)):
            stack.extend(node)


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def labelstudio_tracks(bundle_obj: dict) -> dict:
    """Per-track LabelStudio import lists built from a native bundle object.

    Words render as HTML (bold flags become <b> markup); responses map to
    a single choices control (the 5 shown words for twi, "1"/"2" for twm).
    """
    by_track = {i: [] for i in range(bundle_obj.get("n_tracks", 4))}
    for task in bundle_obj["tasks"]:
        if task["kind"] == "twi":
            choices = [w["w"] for w in task["words"]]
            question = "Select the word that does not belong with the others."
        else:
            choices = ["1", "2"]
            question = "Do these words come from 1 or 2 topics?"
        html = " ".join(f"<b>{w['w']}</b>" if w["bold"] else w["w"]
                        for w in task["words"])
        by_track.setdefault(task["track"], []).append({
            "data": {
                "task_id": task["task_id"],
                "kind": task["kind"],
                "bundle_id": bundle_obj["bundle_id"],
                "track": task["track"],
                "words": html,
                "question": question,
                "choices": choices,
            },
        })
    return by_track


def write_bundle_files(bundle_obj: dict, key_obj: dict, format: str, out_dir) -> list:
    """Write export files from native objects; returns the paths written."""
    if format not in ("native-json", "labelstudio-json"):
        raise ValidationError(f"unknown export format {format!r}")
    assert_no_key_fields(bundle_obj)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "bundle.json", out_dir / "bundle.key.json"]
    dump_json(bundle_obj, written[0])
    dump_json(key_obj, written[1])
    if format == "labelstudio-json":
        for i, items in sorted(labelstudio_tracks(bundle_obj).items()):
            assert_no_key_fields(items)
            p = out_dir / f"track-{i}.labelstudio.json"
            dump_json(items, p)
            written.append(p)
    return written


def export_bundle(bundle: TaskBundle, format: str, out_dir,
                  extra_meta: dict = None) -> list:
    """Write an in-memory bundle: bundle.json plus the sealed
    bundle.key.json, and per-track LabelStudio files when requested."""
    return write_bundle_files(bundle_to_json(bundle, extra_meta),
                              bundle.answer_key(), format, out_dir)


def load_bundle_file(path) -> dict:
    """Read and validate a native bundle file (annotator-facing side)."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or "tasks" not in obj:
        raise ValidationError(f"{path}: not a bundle file")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(
            f"{path}: schema_version {obj.get('schema_version')!r} unsupported")
    assert_no_key_fields(obj)
    seen = set()
    for i, task in enumerate(obj["tasks"]):
        for key in ("task_id", "kind", "model_id", "words", "track"):
            if key not in task:
                raise ValidationError(f"{path}: task {i} missing {key!r}")
        if task["kind"] not in ("twi", "twm"):
            raise ValidationError(f"{path}: task {i} has unknown kind {task['kind']!r}")
        if task["task_id"] in seen:
            raise ValidationError(f"{path}: duplicate task_id {task['task_id']!r}")
        seen.add(task["task_id"])
        n_words = len(task["words"])
        expected = 5 if task["kind"] == "twi" else 8
        if n_words != expected:
            raise ValidationError(
                f"{path}: task {task['task_id']!r} has {n_words} words, "
                f"expected {expected}")
    return obj


def load_key_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: not a key file")
    for tid, entry in obj.items():
        if entry.get("kind") == "twi":
            if "intruder_position" not in entry or "intruder" not in entry:
                raise ValidationError(f"{path}: incomplete twi key for {tid!r}")
        elif entry.get("kind") == "twm":
            if entry.get("label") not in (1, 2):
                raise ValidationError(f"{path}: incomplete twm key for {tid!r}")
        else:
            raise ValidationError(f"{path}: unknown kind in key for {tid!r}")
    return obj

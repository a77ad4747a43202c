"""Automated topic-quality metrics: pairwise NPMI, sliding-window
coherence over NPMI context vectors, and top-word diversity.

All probabilities are boolean window frequencies from WindowCounts.
Coherence of one topic: build one context vector per retained top word
(its NPMI against every retained top word, self term included via the
diagonal), sum them into a topic vector, and average the cosine of each
context vector against that sum. Values are reported raw in [-1, 1] plus
a (x+1)/2 rescaling; both are labeled in the report.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .corpus import Vocabulary, WindowCounts
from .embeddings import cosine
from .errors import ValidationError
from .model_io import TopicModel, top_words

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoherenceConfig:
    top_n: int = 10
    window_size: int = 110
    epsilon: float = 1e-12
    include_self: bool = True
    npmi_gamma: float = 1.0  # exponent on NPMI entries; fixed at 1

    def __post_init__(self):
        if self.top_n < 2:
            raise ValidationError("top_n must be >= 2")
        if self.window_size < 2:
            raise ValidationError("window_size must be >= 2")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be > 0")


@dataclass(frozen=True)
class MetricReport:
    model_id: str
    per_topic_cv: tuple  # float per topic, None where skipped
    cv_mean: float
    cv_mean_rescaled: float
    diversity: float  # None until filled in
    skipped_words: dict  # topic_index -> tuple of words missing from vocab
    skipped_topics: dict  # topic_index -> reason
    config: dict

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "cv_mean": self.cv_mean,
            "cv_mean_rescaled": self.cv_mean_rescaled,
            "cv_scale": {"cv_mean": "[-1,1] raw", "cv_mean_rescaled": "(x+1)/2"},
            "diversity": self.diversity,
            "per_topic_cv": list(self.per_topic_cv),
            "config": self.config,
            "skipped": {
                "words": {str(k): list(v) for k, v in sorted(self.skipped_words.items())},
                "topics": {str(k): v for k, v in sorted(self.skipped_topics.items())},
            },
        }


def npmi(counts: WindowCounts, a: int, b: int, epsilon: float = 1e-12) -> float:
    """Normalized PMI from boolean window counts, in [-1, 1].

    epsilon smooths the joint probability inside both logs so a
    never-co-occurring pair stays finite. epsilon=0 gives the unsmoothed
    estimator (exact 0 at independence); then a zero joint returns the
    -1 limit directly.
    """
    if epsilon < 0:
        raise ValidationError("epsilon must be >= 0")
    occ_a, occ_b = counts.occur(a), counts.occur(b)
    if occ_a == 0 or occ_b == 0:
        raise ValidationError(f"npmi: zero occurrence for word id {a if occ_a == 0 else b}")
    total = counts.total_windows
    p_ab = counts.cooccur(a, b) / total + epsilon
    if p_ab >= 1.0:
        return 1.0
    if p_ab == 0.0:
        return -1.0
    p_a = occ_a / total
    p_b = occ_b / total
    value = math.log(p_ab / (p_a * p_b)) / -math.log(p_ab)
    # the epsilon perturbation can push the ratio past the mathematical
    # range by O(eps / -log p); clamp so the [-1, 1] contract holds
    return min(1.0, max(-1.0, value))


def _usable_words(vocab: Vocabulary, counts: WindowCounts, words):
    kept, dropped = [], []
    for w in words:
        wid = vocab.id_of.get(w)
        if wid is not None and counts.occur(wid) > 0:
            kept.append(w)
        else:
            dropped.append(w)
    return kept, dropped


def cv_topic(counts: WindowCounts, vocab: Vocabulary, topic_words,
             cfg: CoherenceConfig) -> float:
    """Coherence of one topic's word list; raises if < 2 words are usable."""
    kept, dropped = _usable_words(vocab, counts, topic_words)
    if dropped:
        logger.warning("cv_topic: %d word(s) not in corpus vocabulary: %s",
                       len(dropped), dropped)
    n = len(kept)
    if n < 2:
        raise ValidationError("fewer than 2 usable words")
    ids = [vocab.id_of[w] for w in kept]
    mat = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                mat[i, i] = npmi(counts, ids[i], ids[i], cfg.epsilon) \
                    if cfg.include_self else 0.0
            else:
                v = npmi(counts, ids[i], ids[j], cfg.epsilon)
                if cfg.npmi_gamma != 1.0:
                    v = math.copysign(abs(v) ** cfg.npmi_gamma, v)
                mat[i, j] = mat[j, i] = v
    topic_vec = mat.sum(axis=0)
    if not np.any(topic_vec):
        raise ValidationError("degenerate topic vector (all-zero NPMI sums)")
    cosines = []
    for i in range(n):
        if not np.any(mat[i]):
            logger.warning("cv_topic: context vector for %r has zero norm; excluded",
                           kept[i])
            continue
        cosines.append(cosine(mat[i], topic_vec))
    if not cosines:
        raise ValidationError("all context vectors have zero norm")
    return float(np.mean(cosines))


def cv_model(counts: WindowCounts, vocab: Vocabulary, model: TopicModel,
             cfg: CoherenceConfig) -> MetricReport:
    """Per-topic coherence plus the arithmetic mean over non-skipped topics."""
    per_topic = []
    skipped_words = {}
    skipped_topics = {}
    for k in range(model.K):
        n = min(cfg.top_n, model.ranking_length(k))
        words = top_words(model, k, n)
        _, dropped = _usable_words(vocab, counts, words)
        if dropped:
            skipped_words[k] = tuple(dropped)
        try:
            per_topic.append(cv_topic(counts, vocab, words, cfg))
        except ValidationError as exc:
            skipped_topics[k] = str(exc)
            per_topic.append(None)
    usable = [v for v in per_topic if v is not None]
    if not usable:
        raise ValidationError(f"model {model.model_id!r}: all topics skipped")
    mean = float(np.mean(usable))
    return MetricReport(
        model_id=model.model_id,
        per_topic_cv=tuple(per_topic),
        cv_mean=mean,
        cv_mean_rescaled=(mean + 1.0) / 2.0,
        diversity=None,
        skipped_words=skipped_words,
        skipped_topics=skipped_topics,
        config=asdict(cfg),
    )


def diversity(model: TopicModel, top_n: int = 10) -> float:
    """Unique top words over K * top_n; 1 when disjoint, 1/K when identical."""
    for k in range(model.K):
        if model.ranking_length(k) < top_n:
            raise ValidationError(
                f"topic {k} ranking has {model.ranking_length(k)} < {top_n} words")
    unique = set()
    for k in range(model.K):
        unique.update(top_words(model, k, top_n))
    return len(unique) / (model.K * top_n)


def metric_report(counts: WindowCounts, vocab: Vocabulary, model: TopicModel,
                  cfg: CoherenceConfig, diversity_top_n: int = 10) -> MetricReport:
    """Coherence and diversity combined into one report."""
    report = cv_model(counts, vocab, model, cfg)
    return replace(report, diversity=diversity(model, diversity_top_n))

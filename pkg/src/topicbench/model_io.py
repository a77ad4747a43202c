"""Topic models as ranked word lists: loading, validation, rank queries."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

logger = logging.getLogger(__name__)

#: rankings shorter than this make the lower-50%/top-10% intruder
#: constraints degenerate; task generation refuses such models
RANK_FLOOR = 40


@dataclass(frozen=True)
class TopicRef:
    model_id: str
    topic_index: int

    def __str__(self) -> str:
        return f"{self.model_id}#{self.topic_index}"


@dataclass(frozen=True)
class TopicModel:
    """K ordered per-topic word rankings, highest-ranked first."""

    model_id: str
    family: str
    granularity_label: str
    topics: tuple  # tuple of tuples of words

    def __post_init__(self):
        if self.K < 2:
            raise ValidationError(f"model {self.model_id!r}: K must be >= 2")
        for k, ranking in enumerate(self.topics):
            if len(ranking) == 0:
                raise ValidationError(f"model {self.model_id!r}: topic {k} is empty")
            seen = set()
            for w in ranking:
                if w in seen:
                    raise ValidationError(
                        f"model {self.model_id!r}: topic {k} repeats word {w!r}")
                seen.add(w)

    @property
    def K(self) -> int:
        return len(self.topics)

    def ranking_length(self, topic_index: int) -> int:
        return len(self.topics[topic_index])

    def ref(self, topic_index: int) -> TopicRef:
        if not 0 <= topic_index < self.K:
            raise ValidationError(f"topic_index {topic_index} out of range 0..{self.K - 1}")
        return TopicRef(self.model_id, topic_index)


def load_model(path) -> TopicModel:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    for key in ("model_id", "family", "granularity_label", "topics"):
        if key not in obj:
            raise ValidationError(f"{path}: missing field {key!r}")
    return TopicModel(
        model_id=str(obj["model_id"]),
        family=str(obj["family"]),
        granularity_label=str(obj["granularity_label"]),
        topics=tuple(tuple(t) for t in obj["topics"]),
    )


def save_model(model: TopicModel, path) -> None:
    obj = {
        "model_id": model.model_id,
        "family": model.family,
        "granularity_label": model.granularity_label,
        "topics": [list(t) for t in model.topics],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=1, sort_keys=True)
        fh.write("\n")


def load_models_dir(path) -> list:
    """Load every *.model.json under a directory, sorted by filename."""
    files = sorted(Path(path).glob("*.model.json"))
    if not files:
        raise ValidationError(f"no *.model.json files in {path}")
    models = [load_model(f) for f in files]
    seen = set()
    for m in models:
        if m.model_id in seen:
            raise ValidationError(f"duplicate model_id {m.model_id!r} in {path}")
        seen.add(m.model_id)
    return models


def top_words(model: TopicModel, topic_index: int, m: int) -> list:
    """First m entries of a topic's ranking, order preserved."""
    ranking = model.topics[topic_index]
    if not 1 <= m <= len(ranking):
        raise ValidationError(
            f"m={m} out of range 1..{len(ranking)} for topic {topic_index}")
    return list(ranking[:m])


def rank_percentile(model: TopicModel, topic_index: int, word: str):
    """1-based rank position divided by ranking length, or None if absent."""
    ranking = model.topics[topic_index]
    try:
        pos = ranking.index(word) + 1
    except ValueError:
        return None
    return pos / len(ranking)

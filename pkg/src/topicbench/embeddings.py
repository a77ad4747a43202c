"""Precomputed word embeddings: topic vectors, cosine similarity, and
most-confusable topic pair selection.

No encoder ever runs here; the table is an opaque word -> vector map
loaded from a text file.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model_io import TopicModel, TopicRef, top_words

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vec_of: dict  # word -> np.ndarray(dim,) float64
    warnings: tuple = ()

    def __contains__(self, word) -> bool:
        return word in self.vec_of

    def __len__(self) -> int:
        return len(self.vec_of)


@dataclass(frozen=True)
class TopicEmbedding:
    topic: TopicRef
    vector: np.ndarray
    covered: int
    missing: tuple = ()


def load_embeddings(path) -> EmbeddingTable:
    """Parse a word2vec-style text table.

    An optional first line "N dim" (two integers) is treated as a header.
    Duplicate words: the last occurrence wins, with a warning.
    """
    vec_of = {}
    warnings = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            word, comps = parts[0], parts[1:]
            if not comps:
                raise ValidationError(f"{path}:{lineno}: no vector components")
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError as exc:
                raise ValidationError(
                    f"{path}:{lineno}: non-numeric component: {exc}") from exc
            if not np.all(np.isfinite(vec)):
                raise ValidationError(f"{path}:{lineno}: NaN/Inf component")
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValidationError(
                    f"{path}:{lineno}: dimension {len(vec)} != {dim}")
            if word in vec_of:
                warnings.append(f"duplicate word {word!r} at line {lineno}; last wins")
                logger.warning("embedding table: duplicate word %r (line %d)", word, lineno)
            vec.flags.writeable = False
            vec_of[word] = vec
    if dim is None:
        raise ValidationError(f"{path}: empty embedding table")
    return EmbeddingTable(dim=dim, vec_of=vec_of, warnings=tuple(warnings))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|), clipped into [-1, 1]; raises on a zero-norm input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    uu = float(np.dot(u, u))
    vv = float(np.dot(v, v))
    if uu == 0.0 or vv == 0.0:
        raise ValidationError("cosine of zero-norm vector")
    c = float(np.dot(u, v)) / math.sqrt(uu * vv)
    return min(1.0, max(-1.0, c))


def topic_embedding(model: TopicModel, topic_index: int, table: EmbeddingTable,
                    top_n: int = 50) -> TopicEmbedding:
    """Mean vector of the topic's covered top-``top_n`` words.

    Words absent from the table are skipped, not zero-filled; averaging
    runs in sorted word order so the result is exactly invariant under
    permutations of the top words.
    """
    n = min(top_n, model.ranking_length(topic_index))
    words = top_words(model, topic_index, n)
    found = sorted(w for w in words if w in table.vec_of)
    missing = tuple(w for w in words if w not in table.vec_of)
    if not found:
        raise ValidationError(
            f"topic {model.model_id}#{topic_index}: none of the top {n} words "
            "have embeddings")
    if missing:
        logger.warning("topic %s#%d: %d/%d top words missing from embeddings",
                       model.model_id, topic_index, len(missing), n)
    mat = np.stack([table.vec_of[w] for w in found])
    vec = mat.mean(axis=0)
    vec.flags.writeable = False
    return TopicEmbedding(topic=model.ref(topic_index), vector=vec,
                          covered=len(found), missing=missing)


def all_topic_embeddings(model: TopicModel, table: EmbeddingTable,
                         top_n: int = 50) -> list:
    return [topic_embedding(model, k, table, top_n) for k in range(model.K)]


def pairwise_topic_similarities(model: TopicModel, table: EmbeddingTable,
                                top_n: int = 50) -> np.ndarray:
    """Full K x K cosine matrix between topic embeddings (diagonal = 1)."""
    vecs = [te.vector for te in all_topic_embeddings(model, table, top_n)]
    K = model.K
    sim = np.eye(K)
    for i in range(K):
        for j in range(i + 1, K):
            sim[i, j] = sim[j, i] = cosine(vecs[i], vecs[j])
    return sim


def most_similar_pairs(model: TopicModel, table: EmbeddingTable,
                       top_n: int = 50) -> list:
    """Each topic paired with its most similar counterpart.

    Ties in the per-topic argmax go to the lowest other index. Symmetric
    duplicates collapse to one unordered pair; the result is sorted by
    similarity descending, then (lower index, lower partner).
    """
    if model.K < 2:
        raise ValidationError("most_similar_pairs requires K >= 2")
    sim = pairwise_topic_similarities(model, table, top_n)
    K = model.K
    chosen = {}
    for i in range(K):
        best_j, best_s = -1, -np.inf
        for j in range(K):
            if j == i:
                continue
            if sim[i, j] > best_s:
                best_j, best_s = j, sim[i, j]
        a, b = (i, best_j) if i < best_j else (best_j, i)
        chosen[(a, b)] = float(sim[a, b])
    pairs = [
        (TopicRef(model.model_id, a), TopicRef(model.model_id, b), s)
        for (a, b), s in chosen.items()
    ]
    pairs.sort(key=lambda p: (-p[2], p[0].topic_index, p[1].topic_index))
    return pairs


def intruder_head_similarity(head, intruder: str, table: EmbeddingTable) -> float:
    """Mean cosine between the intruder and each covered head word."""
    if intruder not in table.vec_of:
        raise ValidationError(f"intruder {intruder!r} has no embedding")
    ivec = table.vec_of[intruder]
    sims = [cosine(table.vec_of[w], ivec) for w in head if w in table.vec_of]
    if not sims:
        raise ValidationError("no head word has an embedding")
    return float(np.mean(sims))

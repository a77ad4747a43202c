"""Shared fixtures: a) an 18-model campaign grid (6 families x K=10/25/50)
with a synthetic vocabulary and embedding table engineered so every topic
has valid intruder candidates and no confusable pair shares top-4 words;
b) a tiny hand-buildable two-model setup whose construction uses only the
stdlib, so artifacts generated from it (golden files) are stable across
library versions.
"""

import hashlib
import json
import math

import numpy as np
import pytest

from topicbench.corpus import Vocabulary
from topicbench.embeddings import EmbeddingTable
from topicbench.model_io import TopicModel, save_model
from topicbench.taskgen import dump_json

FAMILIES = ("lda", "nmf", "top2vec", "bertopic", "cfmf", "cfmfemb")
GRANULARITIES = ((10, "10"), (25, "25"), (50, "50"))
RANKING_LENGTH = 60
OWN_WORDS = 48  # per topic: 30 upper-half + 18 lower-half filler
EMBED_DIM = 16


def _freq(word: str) -> int:
    if word.startswith("common"):
        return 50_000 + int(word[len("common"):])
    return 900 + int.from_bytes(hashlib.sha256(word.encode()).digest()[:4], "big") % 200


def _word(model_id: str, topic: int, slot: int) -> str:
    return f"{model_id}.t{topic:02d}.w{slot:02d}"


def build_campaign_models():
    models = []
    for family in FAMILIES:
        for K, label in GRANULARITIES:
            model_id = f"{family}{K}"
            topics = []
            for k in range(K):
                own = [_word(model_id, k, r) for r in range(OWN_WORDS)]
                foreign = [_word(model_id, (k + d) % K, r)
                           for d in (1, 2) for r in range(6)]
                ranking = own[:30] + foreign + own[30:]
                assert len(ranking) == RANKING_LENGTH
                assert len(set(ranking)) == RANKING_LENGTH
                topics.append(tuple(ranking))
            models.append(TopicModel(model_id=model_id, family=family,
                                     granularity_label=label, topics=tuple(topics)))
    return models


def build_campaign_vocab(models):
    words = {w for m in models for t in m.topics for w in t}
    words.update(f"common{i:03d}" for i in range(200))
    ordered = sorted(words, key=lambda w: (-_freq(w), w))
    freq = {w: _freq(w) for w in ordered}
    return Vocabulary(
        words=frozenset(ordered),
        id_of={w: i for i, w in enumerate(ordered)},
        corpus_freq=freq,
        sentence_freq=dict(freq),
        min_sentence_freq=1,
        sentence_unit="document",
    )


def build_campaign_table(models):
    rng = np.random.default_rng(20260810)
    vec_of = {}
    for model in sorted(models, key=lambda m: m.model_id):
        centers = rng.normal(size=(model.K, EMBED_DIM))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        for k in range(model.K):
            for r in range(OWN_WORDS):
                v = centers[k] + 0.35 * rng.normal(size=EMBED_DIM)
                v /= np.linalg.norm(v)
                vec_of[_word(model.model_id, k, r)] = v
    common_center = rng.normal(size=EMBED_DIM)
    common_center /= np.linalg.norm(common_center)
    for i in range(200):
        v = common_center + 0.35 * rng.normal(size=EMBED_DIM)
        v /= np.linalg.norm(v)
        vec_of[f"common{i:03d}"] = v
    return EmbeddingTable(dim=EMBED_DIM, vec_of=vec_of)


@pytest.fixture(scope="session")
def campaign_models():
    return build_campaign_models()


@pytest.fixture(scope="session")
def campaign_vocab(campaign_models):
    return build_campaign_vocab(campaign_models)


@pytest.fixture(scope="session")
def campaign_table(campaign_models):
    return build_campaign_table(campaign_models)


def write_embeddings_file(table: EmbeddingTable, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.vec_of)} {table.dim}\n")
        for w in sorted(table.vec_of):
            comps = " ".join(f"{c:.8f}" for c in table.vec_of[w])
            fh.write(f"{w} {comps}\n")


@pytest.fixture(scope="session")
def campaign_files(tmp_path_factory, campaign_models, campaign_vocab, campaign_table):
    """Campaign inputs written to disk for CLI-level tests."""
    root = tmp_path_factory.mktemp("campaign")
    models_dir = root / "models"
    models_dir.mkdir()
    for m in campaign_models:
        save_model(m, models_dir / f"{m.model_id}.model.json")
    vocab_path = root / "vocab.json"
    dump_json(campaign_vocab.to_json(), vocab_path)
    emb_path = root / "embeddings.txt"
    write_embeddings_file(campaign_table, emb_path)
    return {"root": root, "models_dir": models_dir, "vocab": vocab_path,
            "embeddings": emb_path}


# --- tiny stdlib-only setup (stable golden-file source) -------------------

def _mini_component(word: str, c: int) -> float:
    h = int.from_bytes(hashlib.sha256(f"{word}|{c}".encode()).digest()[:4], "big")
    return h / 2 ** 32 - 0.5


def build_mini_models():
    models = []
    for m, family in ((0, "alpha"), (1, "beta")):
        model_id = f"mini{m}"
        topics = []
        K = 4
        for k in range(K):
            own = [f"m{m}t{k}w{r:02d}" for r in range(34)]
            foreign = [f"m{m}t{(k + d) % K}w{r:02d}" for d in (1, 2) for r in range(3)]
            ranking = own[:20] + foreign + own[20:]
            assert len(ranking) == 40 and len(set(ranking)) == 40
            topics.append(tuple(ranking))
        models.append(TopicModel(model_id=model_id, family=family,
                                 granularity_label="10", topics=tuple(topics)))
    return models


def build_mini_vocab(models):
    words = {w for mo in models for t in mo.topics for w in t}
    words.update(f"mc{i}" for i in range(8))
    ordered = sorted(words, key=lambda w: (-_freq(w), w))
    freq = {w: (9_000 + i if w.startswith("mc") else _freq(w))
            for i, w in enumerate(ordered)}
    return Vocabulary(
        words=frozenset(ordered),
        id_of={w: i for i, w in enumerate(ordered)},
        corpus_freq=freq,
        sentence_freq=dict(freq),
        min_sentence_freq=1,
        sentence_unit="document",
    )


def build_mini_table(models):
    """Embeddings from hashes only: word vector = topic anchor + jitter."""
    dim = 8
    vec_of = {}
    for mo in models:
        for k in range(4):
            anchor = [2.0 * _mini_component(f"{mo.model_id}#c{k}", c)
                      for c in range(dim)]
            for r in range(34):
                w = f"m{mo.model_id[-1]}t{k}w{r:02d}"
                vec = [anchor[c] + 0.4 * _mini_component(w, c) for c in range(dim)]
                norm = math.sqrt(math.fsum(x * x for x in vec))
                vec_of[w] = np.array([x / norm for x in vec])
    for i in range(8):
        w = f"mc{i}"
        vec = [_mini_component(w, c) for c in range(dim)]
        norm = math.sqrt(math.fsum(x * x for x in vec))
        vec_of[w] = np.array([x / norm for x in vec])
    return EmbeddingTable(dim=dim, vec_of=vec_of)


@pytest.fixture(scope="session")
def mini_setup():
    models = build_mini_models()
    return {
        "models": models,
        "vocab": build_mini_vocab(models),
        "table": build_mini_table(models),
    }


@pytest.fixture(scope="session")
def mini_files(tmp_path_factory, mini_setup):
    root = tmp_path_factory.mktemp("mini")
    models_dir = root / "models"
    models_dir.mkdir()
    for m in mini_setup["models"]:
        save_model(m, models_dir / f"{m.model_id}.model.json")
    vocab_path = root / "vocab.json"
    dump_json(mini_setup["vocab"].to_json(), vocab_path)
    emb_path = root / "embeddings.txt"
    write_embeddings_file(mini_setup["table"], emb_path)
    return {"root": root, "models_dir": models_dir, "vocab": vocab_path,
            "embeddings": emb_path}


@pytest.fixture(scope="session")
def campaign_corpus_file(tmp_path_factory, campaign_models):
    """Text corpus with one document per topic: its top-10 words, repeated,
    so every topic clears the coherence preconditions."""
    root = tmp_path_factory.mktemp("corpus")
    path = root / "corpus.txt"
    lines = []
    for m in campaign_models:
        for topic in m.topics:
            lines.append(" ".join(list(topic[:10]) * 3))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def write_text(tmp_path):
    def _write(name, content):
        p = tmp_path / name
        p.write_text(content, encoding="utf-8")
        return p
    return _write


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)

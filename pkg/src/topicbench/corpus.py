"""Tokenized-corpus ingestion, vocabulary filtering, and boolean
sliding-window occurrence/co-occurrence counting.

Counting semantics: windows of size ``s`` slide one token at a time and
never cross document boundaries; a document shorter than ``s`` yields a
single window spanning the whole document. ``occur`` and ``cooccur`` count
windows in which a word (or unordered word pair) is present at least once,
not token multiplicities. Out-of-vocabulary tokens occupy window positions
but are never counted.

Two engines produce bit-identical counts: a pure-Python reference and a
numba kernel for corpus-scale inputs. Both use the same episode sweep: a
word's presence in consecutive windows forms maximal intervals, and a pair
is credited once per overlapping window when the earlier-ending interval
closes, so the cost scales with actual co-presence rather than with
windows times window-size squared.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

logger = logging.getLogger(__name__)

CORPUS_FORMATS = ("text", "jsonl")

#: auto engine switches to numba above this many tokens
_NUMBA_THRESHOLD = 100_000


@dataclass(frozen=True)
class Corpus:
    """Ordered tokenized documents with optional sentence segmentation."""

    documents: tuple
    doc_ids: tuple
    # per-document tuple of sentences (each a tuple of tokens), or None
    sentences: tuple = None

    def __post_init__(self):
        if len(self.documents) != len(self.doc_ids):
            raise ValidationError("documents and doc_ids length mismatch")
        if len(self.documents) == 0:
            raise ValidationError("empty corpus")
        seen = set()
        for i, did in enumerate(self.doc_ids):
            if did in seen:
                raise ValidationError(f"duplicate doc_id {did!r}")
            seen.add(did)
        for i, doc in enumerate(self.documents):
            if len(doc) == 0:
                raise ValidationError(f"document {i} has zero tokens")
        if self.sentences is not None and len(self.sentences) != len(self.documents):
            raise ValidationError("sentences and documents length mismatch")

    @property
    def n_documents(self) -> int:
        return len(self.documents)

    @property
    def n_tokens(self) -> int:
        return sum(len(d) for d in self.documents)


@dataclass(frozen=True)
class Vocabulary:
    """Retained words with dense ids, corpus and sentence frequencies.

    ``sentence_unit`` records what a "sentence" was during filtering:
    "sentence" when segmentation was available for every document,
    "document" when none was, "mixed" otherwise.
    """

    words: frozenset
    id_of: dict
    corpus_freq: dict
    sentence_freq: dict
    min_sentence_freq: int
    sentence_unit: str
    warnings: tuple = ()

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.words

    @property
    def word_of(self) -> list:
        """Words indexed by their dense id."""
        out = [None] * len(self.id_of)
        for w, i in self.id_of.items():
            out[i] = w
        return out

    def to_json(self) -> dict:
        return {
            "min_sentence_freq": self.min_sentence_freq,
            "sentence_unit": self.sentence_unit,
            "warnings": list(self.warnings),
            "words": [
                {"w": w, "id": self.id_of[w], "corpus_freq": self.corpus_freq[w],
                 "sentence_freq": self.sentence_freq[w]}
                for w in sorted(self.words, key=lambda w: self.id_of[w])
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Vocabulary":
        words = [e["w"] for e in obj["words"]]
        return cls(
            words=frozenset(words),
            id_of={e["w"]: e["id"] for e in obj["words"]},
            corpus_freq={e["w"]: e["corpus_freq"] for e in obj["words"]},
            sentence_freq={e["w"]: e["sentence_freq"] for e in obj["words"]},
            min_sentence_freq=obj["min_sentence_freq"],
            sentence_unit=obj["sentence_unit"],
            warnings=tuple(obj.get("warnings", ())),
        )


def _pair_key(a: int, b: int) -> int:
    if a > b:
        a, b = b, a
    return (a << 32) | b


@dataclass(frozen=True)
class WindowCounts:
    """Boolean per-window presence counts over a fixed vocabulary.

    Pairs are stored sparsely: only pairs that co-occur in at least one
    window are materialized, as sorted packed int64 keys (min_id<<32|max_id)
    with aligned counts. The diagonal is implicit: cooccur(a, a) == occur(a).
    """

    window_size: int
    total_windows: int
    vocab_size: int
    occur_array: np.ndarray = field(repr=False)
    pair_keys: np.ndarray = field(repr=False)
    pair_counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.occur_array.flags.writeable = False
        self.pair_keys.flags.writeable = False
        self.pair_counts.flags.writeable = False

    def occur(self, word_id: int) -> int:
        return int(self.occur_array[word_id])

    def cooccur(self, a: int, b: int) -> int:
        if a == b:
            return self.occur(a)
        key = _pair_key(a, b)
        i = np.searchsorted(self.pair_keys, key)
        if i < len(self.pair_keys) and self.pair_keys[i] == key:
            return int(self.pair_counts[i])
        return 0

    @property
    def n_pairs(self) -> int:
        return len(self.pair_keys)

    def iter_pairs(self):
        for key, c in zip(self.pair_keys, self.pair_counts):
            yield int(key) >> 32, int(key) & 0xFFFFFFFF, int(c)

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            meta=np.array([self.window_size, self.total_windows, self.vocab_size],
                          dtype=np.int64),
            occur=self.occur_array,
            pair_keys=self.pair_keys,
            pair_counts=self.pair_counts,
        )

    @classmethod
    def load(cls, path) -> "WindowCounts":
        with np.load(path) as data:
            s, tw, vs = (int(x) for x in data["meta"])
            return cls(s, tw, vs, data["occur"].copy(),
                       data["pair_keys"].copy(), data["pair_counts"].copy())


def load_corpus(path, format: str = "text") -> Corpus:
    """Read a pretokenized corpus.

    "text": one document per line, whitespace-separated tokens.
    "jsonl": one object per line with "id" and "tokens", optionally
    "sentences" (a list of token lists) enabling true sentence frequency.
    """
    if format not in CORPUS_FORMATS:
        raise ValidationError(f"unknown corpus format {format!r}")
    docs, ids, sents = [], [], []
    any_sentences = False
    with open(path, encoding="utf-8") as fh:
        if format == "text":
            for i, line in enumerate(fh):
                tokens = line.split()
                if not tokens:
                    raise ValidationError(f"document {i} has zero tokens")
                docs.append(tuple(tokens))
                ids.append(str(i))
                sents.append(None)
        else:
            for i, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"line {i}: invalid JSON: {exc}") from exc
                doc_sents = None
                if "sentences" in obj:
                    doc_sents = tuple(tuple(s) for s in obj["sentences"])
                    any_sentences = True
                if "tokens" in obj:
                    tokens = tuple(obj["tokens"])
                    if doc_sents is not None:
                        flat = tuple(t for s in doc_sents for t in s)
                        if flat != tokens:
                            raise ValidationError(
                                f"document {i}: sentences do not flatten to tokens")
                elif doc_sents is not None:
                    tokens = tuple(t for s in doc_sents for t in s)
                else:
                    raise ValidationError(f"document {i}: missing 'tokens'")
                if not tokens:
                    raise ValidationError(f"document {i} has zero tokens")
                docs.append(tokens)
                ids.append(str(obj.get("id", i)))
                sents.append(doc_sents)
    if not docs:
        raise ValidationError("empty corpus")
    return Corpus(
        documents=tuple(docs),
        doc_ids=tuple(ids),
        sentences=tuple(sents) if any_sentences else None,
    )


def build_vocabulary(corpus: Corpus, min_sentence_freq: int) -> Vocabulary:
    """Retain words appearing in at least ``min_sentence_freq`` sentences.

    A document without sentence segmentation counts as one sentence; the
    fallback is recorded in ``sentence_unit``. corpus_freq always counts
    every token occurrence.
    """
    if min_sentence_freq < 0:
        raise ValidationError("min_sentence_freq must be >= 0")
    corpus_freq = Counter()
    sentence_freq = Counter()
    n_with_sents = 0
    for i, doc in enumerate(corpus.documents):
        corpus_freq.update(doc)
        doc_sents = corpus.sentences[i] if corpus.sentences is not None else None
        if doc_sents:
            n_with_sents += 1
            for sent in doc_sents:
                sentence_freq.update(set(sent))
        else:
            sentence_freq.update(set(doc))
    retained = sorted(
        (w for w, sf in sentence_freq.items() if sf >= min_sentence_freq),
        key=lambda w: (-corpus_freq[w], w),
    )
    if n_with_sents == corpus.n_documents:
        unit = "sentence"
    elif n_with_sents == 0:
        unit = "document"
    else:
        unit = "mixed"
    warnings = ()
    if not retained:
        warnings = ("empty-vocabulary",)
        logger.warning("vocabulary is empty at min_sentence_freq=%d", min_sentence_freq)
    return Vocabulary(
        words=frozenset(retained),
        id_of={w: i for i, w in enumerate(retained)},
        corpus_freq={w: corpus_freq[w] for w in retained},
        sentence_freq={w: sentence_freq[w] for w in retained},
        min_sentence_freq=min_sentence_freq,
        sentence_unit=unit,
        warnings=warnings,
    )


def _token_id_arrays(corpus: Corpus, vocab: Vocabulary):
    """Concatenated token ids (-1 for OOV) plus document offsets."""
    id_of = vocab.id_of
    total = corpus.n_tokens
    ids = np.empty(total, dtype=np.int32)
    offsets = np.empty(corpus.n_documents + 1, dtype=np.int64)
    pos = 0
    offsets[0] = 0
    for d, doc in enumerate(corpus.documents):
        for tok in doc:
            ids[pos] = id_of.get(tok, -1)
            pos += 1
        offsets[d + 1] = pos
    return ids, offsets


def _sweep_python(token_ids: np.ndarray, doc_offsets: np.ndarray, s: int):
    """Reference episode sweep; mirrors the numba kernel exactly."""
    occur = Counter()
    pairs = Counter()
    total_windows = 0

    for d in range(len(doc_offsets) - 1):
        lo, hi = int(doc_offsets[d]), int(doc_offsets[d + 1])
        n = hi - lo
        n_windows = max(n - s + 1, 1)
        total_windows += n_windows
        cnt: dict = {}
        enter: dict = {}

        def close(w, t):
            # episode of w ends at window t-1
            e = enter.pop(w)
            del cnt[w]
            occur[w] += t - e
            for v, ev in enter.items():
                pairs[_pair_key(w, v)] += t - max(e, ev)

        for p in range(min(s, n)):
            w = int(token_ids[lo + p])
            if w < 0:
                continue
            if w not in cnt:
                cnt[w] = 0
                enter[w] = 0
            cnt[w] += 1
        for t in range(1, n_windows):
            w_out = int(token_ids[lo + t - 1])
            if w_out >= 0:
                cnt[w_out] -= 1
                if cnt[w_out] == 0:
                    close(w_out, t)
            w_in = int(token_ids[lo + t + s - 1])
            if w_in >= 0:
                if w_in not in cnt:
                    cnt[w_in] = 0
                    enter[w_in] = t
                cnt[w_in] += 1
        for w in list(enter):
            close(w, n_windows)

    return total_windows, occur, pairs


def count_windows(corpus: Corpus, vocab: Vocabulary, window_size: int,
                  engine: str = "auto") -> WindowCounts:
    """Count per-window boolean occurrences and co-occurrences.

    engine: "python" (reference), "numba" (fast path), or "auto" which
    picks numba only for corpora large enough to amortize JIT latency.
    Both engines return bit-identical counts.
    """
    if window_size < 2:
        raise ValidationError("window_size must be >= 2")
    if engine not in ("auto", "python", "numba"):
        raise ValidationError(f"unknown engine {engine!r}")
    token_ids, offsets = _token_id_arrays(corpus, vocab)
    if engine == "auto":
        engine = "numba" if len(token_ids) >= _NUMBA_THRESHOLD else "python"

    vocab_size = len(vocab)
    if engine == "numba":
        from . import _fastcount

        total, occur_arr, keys, counts = _fastcount.sweep(
            token_ids, offsets, window_size, max(vocab_size, 1))
    else:
        total, occur, pairs = _sweep_python(token_ids, offsets, window_size)
        occur_arr = np.zeros(max(vocab_size, 1), dtype=np.int64)
        for w, c in occur.items():
            occur_arr[w] = c
        keys = np.fromiter(pairs.keys(), dtype=np.int64, count=len(pairs))
        counts = np.fromiter(pairs.values(), dtype=np.int64, count=len(pairs))
        order = np.argsort(keys)
        keys, counts = keys[order], counts[order]
    if vocab_size == 0:
        occur_arr = occur_arr[:0]
    return WindowCounts(
        window_size=window_size,
        total_windows=total,
        vocab_size=vocab_size,
        occur_array=occur_arr,
        pair_keys=keys,
        pair_counts=counts,
    )

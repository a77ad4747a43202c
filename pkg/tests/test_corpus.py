import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicbench.corpus import Corpus, Vocabulary, build_vocabulary, count_windows, \
    load_corpus
from topicbench.errors import ValidationError

from oracles import brute_force_window_counts


def make_corpus(docs):
    return Corpus(documents=tuple(tuple(d) for d in docs),
                  doc_ids=tuple(str(i) for i in range(len(docs))))


class TestLoadCorpus:
    def test_text_two_docs(self, write_text):
        path = write_text("c.txt", "a b c\nb d\n")
        corpus = load_corpus(path, "text")
        assert corpus.n_documents == 2
        assert corpus.n_tokens == 5
        assert corpus.documents[0] == ("a", "b", "c")

    def test_empty_file(self, write_text):
        path = write_text("empty.txt", "")
        with pytest.raises(ValidationError, match="empty corpus"):
            load_corpus(path, "text")

    def test_blank_line_rejected_with_index(self, write_text):
        path = write_text("c.txt", "a b\n\nc\n")
        with pytest.raises(ValidationError, match="document 1"):
            load_corpus(path, "text")

    def test_jsonl_doc_id(self, write_text):
        path = write_text("c.jsonl", '{"id":"d1","tokens":["a","b"]}\n')
        corpus = load_corpus(path, "jsonl")
        assert corpus.n_documents == 1
        assert corpus.doc_ids == ("d1",)
        assert corpus.documents[0] == ("a", "b")

    def test_jsonl_sentences(self, write_text):
        path = write_text("c.jsonl", json.dumps(
            {"id": "d1", "tokens": ["a", "b", "c"],
             "sentences": [["a", "b"], ["c"]]}) + "\n")
        corpus = load_corpus(path, "jsonl")
        assert corpus.sentences[0] == (("a", "b"), ("c",))

    def test_jsonl_sentence_token_mismatch(self, write_text):
        path = write_text("c.jsonl", json.dumps(
            {"id": "d1", "tokens": ["a", "b"], "sentences": [["a"], ["x"]]}) + "\n")
        with pytest.raises(ValidationError, match="flatten"):
            load_corpus(path, "jsonl")

    def test_jsonl_zero_tokens(self, write_text):
        path = write_text("c.jsonl", '{"id":"d1","tokens":[]}\n')
        with pytest.raises(ValidationError, match="zero tokens"):
            load_corpus(path, "jsonl")

    def test_unknown_format(self, write_text):
        path = write_text("c.txt", "a\n")
        with pytest.raises(ValidationError):
            load_corpus(path, "csv")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_corpus(tmp_path / "nope.txt", "text")

    def test_duplicate_doc_ids(self, write_text):
        path = write_text("c.jsonl",
                          '{"id":"d","tokens":["a"]}\n{"id":"d","tokens":["b"]}\n')
        with pytest.raises(ValidationError, match="duplicate doc_id"):
            load_corpus(path, "jsonl")


class TestBuildVocabulary:
    def test_min_two_documents(self):
        corpus = make_corpus([["a", "a", "b"], ["b"]])
        vocab = build_vocabulary(corpus, 2)
        assert vocab.words == {"b"}
        assert vocab.corpus_freq["b"] == 2
        assert vocab.sentence_freq["b"] == 2

    def test_min_zero_keeps_all(self):
        corpus = make_corpus([["a", "a", "b"], ["b", "c"]])
        vocab = build_vocabulary(corpus, 0)
        assert vocab.words == {"a", "b", "c"}
        assert vocab.corpus_freq["a"] == 2  # all occurrences counted

    def test_ids_are_dense_bijection(self):
        corpus = make_corpus([["a", "b", "c", "a"]])
        vocab = build_vocabulary(corpus, 0)
        assert sorted(vocab.id_of.values()) == list(range(len(vocab)))

    def test_against_per_word_document_scan(self):
        # 10-doc synthetic corpus, min=3: exactly the words in >= 3 docs
        rng = random.Random(17)
        docs = [[rng.choice("abcdefgh") for _ in range(rng.randint(1, 12))]
                for _ in range(10)]
        vocab = build_vocabulary(make_corpus(docs), 3)
        for w in "abcdefgh":
            doc_count = sum(1 for d in docs if w in d)
            assert (w in vocab.words) == (doc_count >= 3)
            if w in vocab.words:
                assert vocab.sentence_freq[w] == doc_count
                assert vocab.corpus_freq[w] == sum(d.count(w) for d in docs)

    def test_sentence_unit_fallback_flagged(self):
        vocab = build_vocabulary(make_corpus([["a"]]), 0)
        assert vocab.sentence_unit == "document"

    def test_true_sentences_used(self):
        corpus = Corpus(documents=(("a", "b", "a"),), doc_ids=("d",),
                        sentences=((("a", "b"), ("a",)),))
        vocab = build_vocabulary(corpus, 2)
        assert vocab.sentence_unit == "sentence"
        assert vocab.words == {"a"}  # a in 2 sentences, b in 1

    def test_empty_vocabulary_warned_not_fatal(self):
        vocab = build_vocabulary(make_corpus([["a"]]), 99)
        assert len(vocab) == 0
        assert "empty-vocabulary" in vocab.warnings

    def test_negative_min_rejected(self):
        with pytest.raises(ValidationError):
            build_vocabulary(make_corpus([["a"]]), -1)

    def test_roundtrip_json(self):
        vocab = build_vocabulary(make_corpus([["a", "b"], ["b"]]), 1)
        again = Vocabulary.from_json(json.loads(json.dumps(vocab.to_json())))
        assert again.id_of == vocab.id_of
        assert again.corpus_freq == vocab.corpus_freq


class TestCountWindows:
    def test_hand_enumerable(self):
        corpus = make_corpus([["a", "b", "c"]])
        vocab = build_vocabulary(corpus, 0)
        wc = count_windows(corpus, vocab, 2, engine="python")
        a, b, c = (vocab.id_of[w] for w in "abc")
        assert wc.total_windows == 2
        assert wc.occur(b) == 2
        assert wc.occur(a) == wc.occur(c) == 1
        assert wc.cooccur(a, b) == 1
        assert wc.cooccur(b, c) == 1
        assert wc.cooccur(a, c) == 0

    def test_short_document_single_window(self):
        corpus = make_corpus([["a"]])
        vocab = build_vocabulary(corpus, 0)
        wc = count_windows(corpus, vocab, 110, engine="python")
        assert wc.total_windows == 1
        assert wc.occur(vocab.id_of["a"]) == 1

    def test_window_size_below_two_rejected(self):
        corpus = make_corpus([["a", "b"]])
        vocab = build_vocabulary(corpus, 0)
        with pytest.raises(ValidationError):
            count_windows(corpus, vocab, 1)

    def test_oov_tokens_hold_positions(self):
        corpus = make_corpus([["a", "x", "b"]])
        vocab = Vocabulary(words=frozenset("ab"), id_of={"a": 0, "b": 1},
                           corpus_freq={"a": 1, "b": 1},
                           sentence_freq={"a": 1, "b": 1},
                           min_sentence_freq=0, sentence_unit="document")
        wc = count_windows(corpus, vocab, 2, engine="python")
        # windows: {a,x}, {x,b}: a and b never co-occur
        assert wc.total_windows == 2
        assert wc.cooccur(0, 1) == 0
        assert wc.occur(0) == wc.occur(1) == 1

    def test_random_doc_matches_brute_force(self):
        rng = random.Random(3)
        doc = [rng.choice("vwxyz") for _ in range(200)]
        corpus = make_corpus([doc])
        vocab = build_vocabulary(corpus, 0)
        wc = count_windows(corpus, vocab, 10, engine="python")
        total, occur, cooccur = brute_force_window_counts(
            [doc], vocab.id_of, 10)
        assert wc.total_windows == total
        for w, i in vocab.id_of.items():
            assert wc.occur(i) == occur.get(i, 0)
        for (a, b), n in cooccur.items():
            assert wc.cooccur(a, b) == n
        assert wc.n_pairs == len(cooccur)

    def test_cooccur_diagonal_is_occur(self):
        corpus = make_corpus([["a", "b", "a"]])
        vocab = build_vocabulary(corpus, 0)
        wc = count_windows(corpus, vocab, 2, engine="python")
        a = vocab.id_of["a"]
        assert wc.cooccur(a, a) == wc.occur(a)

    def test_engines_bit_identical(self):
        rng = random.Random(11)
        docs = [[rng.choice("abcdefghij") for _ in range(rng.randint(1, 300))]
                for _ in range(25)]
        corpus = make_corpus(docs)
        vocab = build_vocabulary(corpus, 0)
        for s in (2, 5, 110):
            py = count_windows(corpus, vocab, s, engine="python")
            nb = count_windows(corpus, vocab, s, engine="numba")
            assert py.total_windows == nb.total_windows
            assert np.array_equal(py.occur_array, nb.occur_array)
            assert np.array_equal(py.pair_keys, nb.pair_keys)
            assert np.array_equal(py.pair_counts, nb.pair_counts)

    def test_save_load_roundtrip(self, tmp_path):
        corpus = make_corpus([["a", "b", "c", "a"]])
        vocab = build_vocabulary(corpus, 0)
        wc = count_windows(corpus, vocab, 2, engine="python")
        wc.save(tmp_path / "counts.npz")
        back = wc.load(tmp_path / "counts.npz")
        assert back.total_windows == wc.total_windows
        assert np.array_equal(back.occur_array, wc.occur_array)
        assert np.array_equal(back.pair_keys, wc.pair_keys)

    def test_counts_immutable(self):
        corpus = make_corpus([["a", "b"]])
        vocab = build_vocabulary(corpus, 0)
        wc = count_windows(corpus, vocab, 2, engine="python")
        with pytest.raises(ValueError):
            wc.occur_array[0] = 99


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_count_invariants_on_random_corpora(data):
    docs = data.draw(st.lists(
        st.lists(st.sampled_from("abcdef"), min_size=1, max_size=30),
        min_size=1, max_size=6))
    s = data.draw(st.integers(min_value=2, max_value=12))
    corpus = make_corpus(docs)
    vocab = build_vocabulary(corpus, 0)
    wc = count_windows(corpus, vocab, s, engine="python")
    ids = list(vocab.id_of.values())
    assert sum(wc.occur(i) for i in ids) <= wc.total_windows * len(vocab)
    for a in ids:
        assert 0 <= wc.occur(a) <= wc.total_windows
        for b in ids:
            co = wc.cooccur(a, b)
            assert co == wc.cooccur(b, a)
            assert 0 <= co <= min(wc.occur(a), wc.occur(b))
    # determinism under identical inputs
    again = count_windows(corpus, vocab, s, engine="python")
    assert np.array_equal(wc.pair_counts, again.pair_counts)

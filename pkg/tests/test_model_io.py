import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicbench.errors import ValidationError
from topicbench.model_io import TopicModel, load_model, load_models_dir, \
    rank_percentile, save_model, top_words


def write_model(tmp_path, obj, name="m.model.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


BASE = {"model_id": "m", "family": "lda", "granularity_label": "10"}


class TestLoadModel:
    def test_basic(self, tmp_path):
        path = write_model(tmp_path, dict(BASE, topics=[["a", "b"], ["c", "d"]]))
        model = load_model(path)
        assert model.K == 2
        assert model.topics == (("a", "b"), ("c", "d"))

    def test_duplicate_word_names_topic_and_word(self, tmp_path):
        path = write_model(tmp_path, dict(BASE, topics=[["a", "b", "a"], ["c", "d"]]))
        with pytest.raises(ValidationError, match=r"topic 0 repeats word 'a'"):
            load_model(path)

    def test_single_topic_rejected(self, tmp_path):
        path = write_model(tmp_path, dict(BASE, topics=[["a", "b"]]))
        with pytest.raises(ValidationError, match="K must be >= 2"):
            load_model(path)

    def test_empty_topic_rejected(self, tmp_path):
        path = write_model(tmp_path, dict(BASE, topics=[["a"], []]))
        with pytest.raises(ValidationError, match="topic 1 is empty"):
            load_model(path)

    def test_missing_field(self, tmp_path):
        path = write_model(tmp_path, {"model_id": "m", "topics": [["a"], ["b"]]})
        with pytest.raises(ValidationError, match="family"):
            load_model(path)

    def test_save_load_roundtrip(self, tmp_path):
        model = TopicModel(**BASE, topics=(("a", "b"), ("c", "d")))
        save_model(model, tmp_path / "m.model.json")
        assert load_model(tmp_path / "m.model.json") == model

    def test_directory_loads_the_full_grid(self, campaign_files, campaign_models):
        models = load_models_dir(campaign_files["models_dir"])
        assert len(models) == 18  # 6 families x 3 granularities
        assert {m.model_id for m in models} == {m.model_id for m in campaign_models}

    def test_directory_without_models(self, tmp_path):
        with pytest.raises(ValidationError, match="no .*model.json"):
            load_models_dir(tmp_path)


class TestTopWords:
    def test_prefix(self):
        model = TopicModel(**BASE, topics=(("x", "y", "z"), ("a", "b")))
        assert top_words(model, 0, 2) == ["x", "y"]

    def test_full_ranking(self):
        model = TopicModel(**BASE, topics=(("x", "y", "z"), ("a", "b")))
        assert top_words(model, 0, 3) == ["x", "y", "z"]

    def test_out_of_range(self):
        model = TopicModel(**BASE, topics=(("x", "y"), ("a", "b")))
        for m in (0, 3):
            with pytest.raises(ValidationError):
                top_words(model, 0, m)

    def test_matches_source_file_slice(self, tmp_path):
        ranking = [f"w{i:03d}" for i in range(200)]
        obj = dict(BASE, topics=[ranking, ["a", "b"]])
        path = write_model(tmp_path, obj)
        model = load_model(path)
        raw = json.loads(path.read_text())["topics"][0][:8]
        assert top_words(model, 0, 8) == raw


class TestRankPercentile:
    def _model_100(self):
        return TopicModel(**BASE, topics=(
            tuple(f"w{i}" for i in range(100)), ("a", "b")))

    def test_first_position(self):
        assert rank_percentile(self._model_100(), 0, "w0") == 0.01

    def test_median_position_is_not_lower_half(self):
        # percentile 0.50 sits on the boundary; only > 0.5 counts as lower half
        assert rank_percentile(self._model_100(), 0, "w49") == 0.50

    def test_absent_word(self):
        assert rank_percentile(self._model_100(), 0, "zzz") is None

    def test_matches_linear_scan(self):
        rng = random.Random(5)
        ranking = tuple(f"w{i}" for i in rng.sample(range(500), 73))
        model = TopicModel(**BASE, topics=(ranking, ("a", "b")))
        for word in list(ranking[::7]) + ["nope"]:
            expected = None
            for pos, w in enumerate(ranking, 1):
                if w == word:
                    expected = pos / len(ranking)
                    break
            assert rank_percentile(model, 0, word) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=60), st.integers(min_value=1, max_value=60))
def test_top_words_prefix_property(m1, m2):
    ranking = tuple(f"w{i}" for i in range(60))
    model = TopicModel(**BASE, topics=(ranking, ("a", "b")))
    lo, hi = sorted((m1, m2))
    assert top_words(model, 0, hi)[:lo] == top_words(model, 0, lo)


def test_rank_percentile_strictly_increasing():
    ranking = tuple(f"w{i}" for i in range(37))
    model = TopicModel(**BASE, topics=(ranking, ("a", "b")))
    values = [rank_percentile(model, 0, w) for w in ranking]
    assert all(a < b for a, b in zip(values, values[1:]))

"""Topic-model evaluation toolkit: automated coherence/diversity metrics
plus generation and scoring of human word-intrusion and word-mixing
annotation campaigns."""

__version__ = "0.1.0"

from .corpus import Corpus, Vocabulary, WindowCounts, build_vocabulary, \
    count_windows, load_corpus
from .embeddings import EmbeddingTable, cosine, intruder_head_similarity, \
    load_embeddings, most_similar_pairs, topic_embedding
from .errors import InvariantError, TopicBenchError, ValidationError
from .metrics import CoherenceConfig, MetricReport, cv_model, cv_topic, \
    diversity, metric_report, npmi
from .model_io import TopicModel, TopicRef, load_model, load_models_dir, \
    rank_percentile, top_words
from .scoring import AnnotationSet, ScoringContext, adjust_scores, \
    difficulty_regression, fleiss_kappa, percent_agreement, score_report, \
    score_twi, score_twm
from .taskgen import SamplingPlan, TaskBundle, TwiTask, TwmTask, \
    assemble_bundle, export_bundle, gen_twi, gen_twm, select_intruder

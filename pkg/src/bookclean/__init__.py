"""Toolkit for cleaning corpora of scanned books.

Duplicate scans of a work are found by five-gram overlap, aligned token by
token, and their differing sentences rated to pick correct readings; the
comparisons drive canonical-copy selection, training-data export, error
channel mining, and correction of books that exist in only one copy.
"""

from .align import (
    AlignConfig,
    AlignmentImpossible,
    DifferenceRecord,
    GapPair,
    PairAlignment,
    align_pair,
    align_token_texts,
    extract_differences,
)
from .analysis import SubstitutionTable, mine_substitutions
from .canonical import (
    BookComparison,
    CanonicalResult,
    build_comparison,
    compare_books,
    golden_eval,
    tournament,
)
from .config import ConfigError, PipelineConfig, load_config
from .corpus import (
    Book,
    BookMeta,
    CorpusError,
    Digitizer,
    Token,
    load_corpus,
    parse_metadata,
    segment_sentences,
    tokenize,
)
from .dedup import DuplicateSet, cluster, cluster_and_filter, filter_anthologies, overlap
from .external import (
    ExternalScorerClient,
    ExternalScorerDied,
    ExternalScorerError,
    ExternalScorerTimeout,
    ProtocolError,
)
from .lm import NgramConfig, NgramLM, train_ngram
from .scoring import (
    DictionaryScorer,
    NgramScorer,
    RatedPair,
    SentenceScore,
    load_lexicon,
    rate_pair,
    softmax_pair,
)
from .singlecopy import (
    ChannelCorrector,
    ChannelDetector,
    CorrectorConfig,
    TrainingExample,
    build_channel,
    correct,
    correct_book,
    detect,
    evaluate_corrections,
    export_training,
    make_error_example,
    parse_marked,
)

__version__ = "0.1.0"

"""Paraphrase candidate generation, scoring, filtering, and selection.

Generate candidate paraphrases through a text-generation backend, score
each against its original with embedding cosine similarity and
ROUGE-L/BLEU overlap, reject near-copies and meaning drift by
threshold, and select the best survivor. Ships corpus tooling for
fine-tuning file emission, dataset statistics, and tokenization
calibration, plus a JSON-emitting command line.
"""

from .corpus import (
    CalibrationEntry,
    CalibrationFixture,
    CalibrationReport,
    DatasetStats,
    ScoredPair,
    build_train_file,
    bundled_calibration_fixtures,
    bundled_paragraph_pairs,
    bundled_selection_fixture,
    calibrate_tokenization,
    dataset_stats,
    format_train_example,
    load_calibration_fixtures,
    load_pairs,
    parse_train_file,
    parse_train_text,
    score_pairs,
)
from .embeddings import (
    EMBEDDING_DIM,
    ProviderConfig,
    cosine_similarity,
    embed,
    embed_fallback,
)
from .errors import (
    ContractError,
    EmptyDatasetError,
    InputError,
    ParakitError,
    TransportError,
)
from .generation import (
    BackendConfig,
    ParaphrasePair,
    PromptFormat,
    RawCompletion,
    SamplingParams,
    classify_completion,
    format_prompt,
    generate_candidates,
    load_stub_fixtures,
    parse_completion,
    sample_naive,
)
from .selection import (
    ScoredCandidate,
    SelectionPolicy,
    SelectionReport,
    build_report,
    filter_candidates,
    judge_candidate,
    paraphrase,
    report_from_dict,
    report_from_json_line,
    report_to_dict,
    report_to_json_line,
    score_candidate,
    score_candidates,
    select_best,
)
from .text_metrics import (
    BleuScore,
    RougeScore,
    TokenizationPolicy,
    bleu,
    lcs_length,
    rouge_l,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "BleuScore",
    "CalibrationEntry",
    "CalibrationFixture",
    "CalibrationReport",
    "ContractError",
    "DatasetStats",
    "EMBEDDING_DIM",
    "EmptyDatasetError",
    "InputError",
    "ParakitError",
    "ParaphrasePair",
    "PromptFormat",
    "ProviderConfig",
    "RawCompletion",
    "RougeScore",
    "SamplingParams",
    "ScoredCandidate",
    "ScoredPair",
    "SelectionPolicy",
    "SelectionReport",
    "TokenizationPolicy",
    "TransportError",
    "build_report",
    "build_train_file",
    "bundled_calibration_fixtures",
    "bundled_paragraph_pairs",
    "bundled_selection_fixture",
    "calibrate_tokenization",
    "classify_completion",
    "cosine_similarity",
    "dataset_stats",
    "embed",
    "embed_fallback",
    "filter_candidates",
    "format_prompt",
    "format_train_example",
    "generate_candidates",
    "judge_candidate",
    "lcs_length",
    "load_calibration_fixtures",
    "load_pairs",
    "load_stub_fixtures",
    "paraphrase",
    "parse_completion",
    "parse_train_file",
    "parse_train_text",
    "report_from_dict",
    "report_from_json_line",
    "report_to_dict",
    "report_to_json_line",
    "rouge_l",
    "sample_naive",
    "score_candidate",
    "score_candidates",
    "score_pairs",
    "select_best",
    "tokenize",
    "bleu",
]

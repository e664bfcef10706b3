"""Dataset ingestion, training-file emission, statistics, and calibration.

Loads paraphrase pair datasets (MSR paraphrase corpus TSV or a generic
JSONL pair format), writes fine-tuning text files in the
``original >>>> paraphrase`` layout, computes dataset-average similarity
and overlap statistics, and sweeps tokenization settings against a small
bundle of sentence pairs with known scores to find the configuration
that best matches them.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib.resources import files
from statistics import fmean
from typing import Literal, Sequence

from .embeddings import ProviderConfig, cosine_similarity, embed
from .errors import EmptyDatasetError, InputError
from .generation import ParaphrasePair, PromptFormat
from .selection import DEFAULT_POLICY, SelectionPolicy
from .text_metrics import (
    PUNCTUATION_MODES,
    SMOOTHING_MODES,
    BleuScore,
    RougeScore,
    SmoothingMode,
    TokenizationPolicy,
    bleu,
    rouge_l,
    tokenize,
)

logger = logging.getLogger(__name__)

PairFormat = Literal["msr_tsv", "jsonl"]

PAIR_FORMATS: tuple[str, ...] = ("msr_tsv", "jsonl")


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def load_pairs(
    path: str,
    format: PairFormat = "jsonl",
    quality_filter: bool = True,
) -> list[ParaphrasePair]:
    """Load paraphrase pairs from a dataset file.

    ``msr_tsv`` expects the MSR paraphrase corpus layout: a header row,
    then tab-separated (quality, id1, id2, string1, string2) rows. With
    ``quality_filter`` on, only quality-1 rows count as paraphrase pairs;
    off keeps every well-formed row regardless of label. ``jsonl``
    expects one {"original": ..., "paraphrase": ...} object per line
    (optional "source_id"). Malformed rows are skipped and reported as a
    counted warning; a file yielding zero pairs is an error.
    """
    if format not in PAIR_FORMATS:
        raise InputError(f"unknown pair format {format!r}; expected one of {PAIR_FORMATS}")
    with open(path, encoding="utf-8-sig") as handle:
        lines = handle.readlines()
    if format == "msr_tsv":
        pairs, skipped = _parse_msr_tsv(lines, quality_filter)
    else:
        pairs, skipped = _parse_jsonl_pairs(lines)
    if skipped:
        logger.warning("skipped %d malformed row(s) in %s", skipped, path)
    if not pairs:
        raise EmptyDatasetError(f"no valid pairs in {path}")
    return pairs


def _parse_msr_tsv(
    lines: Sequence[str], quality_filter: bool
) -> tuple[list[ParaphrasePair], int]:
    pairs: list[ParaphrasePair] = []
    skipped = 0
    # First line is the column header, never a data row.
    for line in lines[1:]:
        row = line.rstrip("\n").rstrip("\r")
        if not row.strip():
            continue
        fields = row.split("\t")
        if len(fields) != 5:
            skipped += 1
            continue
        quality_text, id1, id2, original, para = (f.strip() for f in fields)
        if quality_text not in ("0", "1") or not original or not para:
            skipped += 1
            continue
        if quality_filter and quality_text != "1":
            continue
        pairs.append(
            ParaphrasePair(original=original, paraphrase=para, source_id=f"{id1}-{id2}")
        )
    return pairs, skipped


def _parse_jsonl_pairs(lines: Sequence[str]) -> tuple[list[ParaphrasePair], int]:
    pairs: list[ParaphrasePair] = []
    skipped = 0
    for line in lines:
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError:
            skipped += 1
            continue
        if not isinstance(obj, dict):
            skipped += 1
            continue
        original = obj.get("original")
        para = obj.get("paraphrase")
        if (
            not isinstance(original, str)
            or not original.strip()
            or not isinstance(para, str)
            or not para.strip()
        ):
            skipped += 1
            continue
        source_id = obj.get("source_id")
        if not isinstance(source_id, str):
            source_id = None
        pairs.append(ParaphrasePair(original=original, paraphrase=para, source_id=source_id))
    return pairs, skipped


# ---------------------------------------------------------------------------
# Training-file emission and its inverse
# ---------------------------------------------------------------------------


def format_train_example(pair: ParaphrasePair, fmt: PromptFormat = PromptFormat()) -> str:
    """Serialize one pair: original, separator, paraphrase, end marker, newline.

    Single spaces surround the separator; nothing separates the
    paraphrase from the end-of-example marker.
    """
    return f"{pair.original} {fmt.separator} {pair.paraphrase}{fmt.end_of_example}\n"


def build_train_file(
    pairs: Sequence[ParaphrasePair],
    fmt: PromptFormat = PromptFormat(),
    out: str = "train.txt",
) -> int:
    """Write pairs as a fine-tuning text file; returns examples written.

    Pairs whose texts contain the separator or end-of-example marker
    would corrupt the format, so they are skipped with a counted warning.
    Output order matches input order. Zero writable pairs is an error.
    """
    if not pairs:
        raise InputError("pairs must be non-empty")
    examples: list[str] = []
    skipped = 0
    for pair in pairs:
        if any(
            marker in text
            for marker in (fmt.separator, fmt.end_of_example)
            for text in (pair.original, pair.paraphrase)
        ):
            skipped += 1
            continue
        examples.append(format_train_example(pair, fmt))
    if skipped:
        logger.warning("skipped %d pair(s) containing format markers", skipped)
    if not examples:
        raise EmptyDatasetError("no writable pairs after marker filtering")
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.writelines(examples)
    return len(examples)


def parse_train_text(content: str, fmt: PromptFormat = PromptFormat()) -> list[ParaphrasePair]:
    """Inverse of build_train_file on file content; exact recovery.

    Splits on the end-of-example marker plus newline, then on the first
    space-padded separator within each example. Texts come back exactly
    as written, whitespace included. Any chunk without the separator is
    malformed and raises, so this doubles as a format validator.
    """
    terminator = fmt.end_of_example + "\n"
    padded_separator = f" {fmt.separator} "
    pairs: list[ParaphrasePair] = []
    for chunk in content.split(terminator):
        if not chunk:
            continue
        original, found, para = chunk.partition(padded_separator)
        if not found:
            raise InputError(
                f"malformed training example (no separator): {chunk[:80]!r}"
            )
        pairs.append(ParaphrasePair(original=original, paraphrase=para))
    return pairs


def parse_train_file(path: str, fmt: PromptFormat = PromptFormat()) -> list[ParaphrasePair]:
    """Read a training file back into pairs."""
    with open(path, encoding="utf-8", newline="") as handle:
        return parse_train_text(handle.read(), fmt)


# ---------------------------------------------------------------------------
# Dataset statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScoredPair:
    """One pair with its similarity and overlap scores."""

    pair: ParaphrasePair
    similarity: float
    rouge_l: RougeScore
    bleu: BleuScore


@dataclass(frozen=True)
class DatasetStats:
    """Arithmetic means of pair scores over a dataset."""

    n_pairs: int
    mean_similarity: float
    mean_rouge_l: float
    mean_bleu: float


def score_pairs(
    pairs: Sequence[ParaphrasePair],
    policy: SelectionPolicy = DEFAULT_POLICY,
    embedder: ProviderConfig = ProviderConfig(),
) -> list[ScoredPair]:
    """Score every pair, paraphrase as candidate against its original.

    All texts are embedded in one batched call. Output order matches
    input order.
    """
    if not pairs:
        raise EmptyDatasetError("pairs must be non-empty")
    texts = [p.original for p in pairs] + [p.paraphrase for p in pairs]
    vectors = embed(texts, embedder)
    n = len(pairs)
    scored: list[ScoredPair] = []
    for i, pair in enumerate(pairs):
        reference = tokenize(pair.original, policy.tokenization)
        candidate = tokenize(pair.paraphrase, policy.tokenization)
        scored.append(
            ScoredPair(
                pair=pair,
                similarity=cosine_similarity(vectors[i], vectors[n + i]),
                rouge_l=rouge_l(candidate, reference),
                bleu=bleu(candidate, reference),
            )
        )
    return scored


def stats_from_scored(scored: Sequence[ScoredPair]) -> DatasetStats:
    """Arithmetic means over already-scored pairs."""
    if not scored:
        raise EmptyDatasetError("scored pairs must be non-empty")
    return DatasetStats(
        n_pairs=len(scored),
        mean_similarity=fmean(s.similarity for s in scored),
        mean_rouge_l=fmean(s.rouge_l.f_measure for s in scored),
        mean_bleu=fmean(s.bleu.score for s in scored),
    )


def dataset_stats(
    pairs: Sequence[ParaphrasePair],
    policy: SelectionPolicy = DEFAULT_POLICY,
    embedder: ProviderConfig = ProviderConfig(),
) -> DatasetStats:
    """Dataset-average similarity, ROUGE-L f-measure, and BLEU."""
    scored = score_pairs(pairs, policy, embedder)
    if embedder.kind == "fallback":
        logger.warning(
            "similarity means use the fallback hashing embedder and are not "
            "comparable to scores from a sentence-encoder backend"
        )
    return stats_from_scored(scored)


def stats_to_dict(stats: DatasetStats, embedder_kind: str) -> dict:
    """JSON form of DatasetStats, tagged with which embedder produced it."""
    return {
        "n_pairs": stats.n_pairs,
        "mean_similarity": stats.mean_similarity,
        "mean_rouge_l": stats.mean_rouge_l,
        "mean_bleu": stats.mean_bleu,
        "embedder_kind": embedder_kind,
    }


# ---------------------------------------------------------------------------
# Tokenization calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationFixture:
    """A candidate/reference pair with known ROUGE-L and BLEU scores."""

    candidate: str
    reference: str
    rouge_l: float
    bleu: float


@dataclass(frozen=True)
class CalibrationEntry:
    """Mean absolute error of one tokenization/smoothing configuration."""

    tokenization: TokenizationPolicy
    smoothing: SmoothingMode
    rouge_mae: float
    bleu_mae: float
    overall_mae: float


@dataclass(frozen=True)
class CalibrationReport:
    """Error sweep over the configuration grid plus its minimizer."""

    entries: tuple[CalibrationEntry, ...]
    best: CalibrationEntry


def calibrate_tokenization(
    fixtures: Sequence[CalibrationFixture] | None = None,
) -> CalibrationReport:
    """Sweep tokenization and BLEU smoothing against known-score pairs.

    For every case-folding x punctuation-mode x smoothing combination
    (ROUGE-L beta fixed at 1), recomputes both metrics on each fixture
    and reports mean absolute error against the fixture's known scores;
    overall error is the mean of the two MAEs. The best entry is the
    overall minimizer; ties resolve to the earliest grid position, so
    the result is deterministic. Defaults to the bundled fixture pairs.
    """
    if fixtures is None:
        fixtures = bundled_calibration_fixtures()
    if not fixtures:
        raise InputError("fixtures must be non-empty")
    entries: list[CalibrationEntry] = []
    for case_fold in (True, False):
        for mode in PUNCTUATION_MODES:
            policy = TokenizationPolicy(case_fold=case_fold, punctuation_mode=mode)
            token_pairs = [
                (tokenize(fx.candidate, policy), tokenize(fx.reference, policy))
                for fx in fixtures
            ]
            rouge_mae = fmean(
                abs(rouge_l(cand, ref).f_measure - fx.rouge_l)
                for (cand, ref), fx in zip(token_pairs, fixtures)
            )
            for smoothing in SMOOTHING_MODES:
                bleu_mae = fmean(
                    abs(bleu(cand, ref, smoothing=smoothing).score - fx.bleu)
                    for (cand, ref), fx in zip(token_pairs, fixtures)
                )
                entries.append(
                    CalibrationEntry(
                        tokenization=policy,
                        smoothing=smoothing,
                        rouge_mae=rouge_mae,
                        bleu_mae=bleu_mae,
                        overall_mae=(rouge_mae + bleu_mae) / 2,
                    )
                )
    best = min(entries, key=lambda e: e.overall_mae)
    return CalibrationReport(entries=tuple(entries), best=best)


def _calibration_entry_to_dict(entry: CalibrationEntry) -> dict:
    return {
        "case_fold": entry.tokenization.case_fold,
        "punctuation_mode": entry.tokenization.punctuation_mode,
        "smoothing": entry.smoothing,
        "rouge_mae": entry.rouge_mae,
        "bleu_mae": entry.bleu_mae,
        "overall_mae": entry.overall_mae,
    }


def calibration_to_dict(report: CalibrationReport) -> dict:
    """JSON form of a calibration report."""
    return {
        "entries": [_calibration_entry_to_dict(e) for e in report.entries],
        "best": _calibration_entry_to_dict(report.best),
    }


# ---------------------------------------------------------------------------
# Bundled fixture data
# ---------------------------------------------------------------------------


def _read_data_file(name: str) -> str:
    return (files("parakit") / "data" / name).read_text(encoding="utf-8")


def _fixtures_from_payload(payload: dict) -> list[CalibrationFixture]:
    try:
        return [
            CalibrationFixture(
                candidate=row["candidate"],
                reference=row["reference"],
                rouge_l=row["rouge_l"],
                bleu=row["bleu"],
            )
            for row in payload["pairs"]
        ]
    except (KeyError, TypeError) as exc:
        raise InputError(
            'calibration fixtures must be {"pairs": [{"candidate", "reference", '
            '"rouge_l", "bleu"}, ...]}'
        ) from exc


def load_calibration_fixtures(path: str) -> list[CalibrationFixture]:
    """Load calibration fixtures from a JSON file."""
    with open(path, encoding="utf-8") as handle:
        return _fixtures_from_payload(json.load(handle))


def bundled_calibration_fixtures() -> list[CalibrationFixture]:
    """Sentence pairs with known metric scores, for calibration sweeps."""
    return _fixtures_from_payload(json.loads(_read_data_file("calibration_pairs.json")))


def bundled_selection_fixture() -> dict:
    """An original with nine scored candidates and the expected winner.

    Keys: "original"; "candidates" as a list of {"text", "similarity",
    "rouge_l"}; "selected_index" of the candidate the thresholds should
    single out. Doubles as a stub-backend fixture (original -> texts)
    and a score-injection fixture for filter tests.
    """
    return json.loads(_read_data_file("selection_fixture.json"))


def bundled_paragraph_pairs() -> list[ParaphrasePair]:
    """Three whole-paragraph pairs for paragraph-level smoke tests."""
    pairs: list[ParaphrasePair] = []
    for line in _read_data_file("paragraph_pairs.jsonl").splitlines():
        if line.strip():
            obj = json.loads(line)
            pairs.append(
                ParaphrasePair(
                    original=obj["original"],
                    paraphrase=obj["paraphrase"],
                    source_id=obj.get("source_id"),
                )
            )
    return pairs

"""Candidate scoring, threshold filtering, and best-paraphrase selection.

Each candidate is scored against its original on two axes: embedding
cosine similarity (meaning preserved?) and ROUGE-L overlap (wording
changed?). Candidates with too much lexical overlap or too little
semantic similarity are rejected; among the survivors the most similar
wins. BLEU is carried along for reporting only and never filters.

Reports serialize to JSON Lines with a fixed field layout so runs can
be diffed, audited, and re-loaded losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal, Sequence

from .embeddings import ProviderConfig, cosine_similarity, embed
from .errors import InputError
from .generation import BackendConfig, PromptFormat, SamplingParams, generate_candidates
from .text_metrics import (
    DEFAULT_TOKENIZATION,
    ZERO_ROUGE,
    BleuScore,
    RougeScore,
    TokenizationPolicy,
    bleu,
    rouge_l,
    tokenize,
)

Verdict = Literal["accepted", "rejected_rouge", "rejected_similarity", "rejected_empty"]

VERDICTS: tuple[Verdict, ...] = (
    "accepted",
    "rejected_rouge",
    "rejected_similarity",
    "rejected_empty",
)


@dataclass(frozen=True)
class SelectionPolicy:
    """Thresholds and scoring options for candidate filtering.

    A candidate is rejected when its ROUGE-L f-measure is strictly above
    ``rouge_max`` (too close to a copy) or, passing that, when its
    similarity is strictly below ``similarity_min`` (drifted in meaning).
    ``similarity_max`` optionally rejects suspiciously-near-identical
    candidates from above; it stays disabled by default because the
    ROUGE-L cutoff already catches near-copies.
    """

    rouge_max: float = 0.7
    similarity_min: float = 0.85
    similarity_max: float | None = None
    compute_bleu: bool = True
    tokenization: TokenizationPolicy = DEFAULT_TOKENIZATION

    def __post_init__(self) -> None:
        if not 0 < self.rouge_max <= 1:
            raise ValueError(f"rouge_max must be in (0, 1], got {self.rouge_max}")
        if not 0 <= self.similarity_min < 1:
            raise ValueError(
                f"similarity_min must be in [0, 1), got {self.similarity_min}"
            )
        if self.similarity_max is not None and not (
            self.similarity_min < self.similarity_max <= 1
        ):
            raise ValueError(
                "similarity_max, when set, must lie in (similarity_min, 1], "
                f"got {self.similarity_max}"
            )


DEFAULT_POLICY = SelectionPolicy()


@dataclass(frozen=True)
class ScoredCandidate:
    """A candidate paraphrase with its scores and filter verdict."""

    text: str
    similarity: float
    rouge_l: RougeScore
    bleu: BleuScore | None
    verdict: Verdict
    rejection_detail: str = ""


@dataclass(frozen=True)
class SelectionReport:
    """Full audit record of one selection run.

    ``selected_index`` points into ``candidates`` at the winning accepted
    candidate, or is None when nothing survived filtering. Rejected
    candidates are retained so the run can be audited afterwards.
    """

    original: str
    candidates: tuple[ScoredCandidate, ...]
    selected_index: int | None
    policy: SelectionPolicy

    @property
    def selected(self) -> ScoredCandidate | None:
        if self.selected_index is None:
            return None
        return self.candidates[self.selected_index]

    @property
    def accepted(self) -> tuple[ScoredCandidate, ...]:
        return tuple(c for c in self.candidates if c.verdict == "accepted")


# ---------------------------------------------------------------------------
# Verdicts from scores
# ---------------------------------------------------------------------------


def judge_candidate(
    text: str,
    similarity: float,
    rouge: RougeScore,
    bleu_score: BleuScore | None = None,
    policy: SelectionPolicy = DEFAULT_POLICY,
) -> ScoredCandidate:
    """Assign a verdict to a candidate from already-computed scores.

    The ROUGE check runs first, then the similarity check, so a candidate
    failing both reports rejected_rouge. Thresholds reject on strict
    inequality: exactly rouge_max or exactly similarity_min is accepted.
    """
    if not text.strip():
        return ScoredCandidate(
            text=text,
            similarity=0.0,
            rouge_l=ZERO_ROUGE,
            bleu=None,
            verdict="rejected_empty",
            rejection_detail="empty candidate",
        )
    if rouge.f_measure > policy.rouge_max:
        verdict: Verdict = "rejected_rouge"
        detail = (
            f"rouge_l f_measure {rouge.f_measure:.4f} > rouge_max {policy.rouge_max}"
        )
    elif similarity < policy.similarity_min:
        verdict = "rejected_similarity"
        detail = (
            f"similarity {similarity:.4f} < similarity_min {policy.similarity_min}"
        )
    elif policy.similarity_max is not None and similarity > policy.similarity_max:
        verdict = "rejected_similarity"
        detail = (
            f"similarity {similarity:.4f} > similarity_max {policy.similarity_max}"
        )
    else:
        verdict = "accepted"
        detail = ""
    return ScoredCandidate(
        text=text,
        similarity=similarity,
        rouge_l=rouge,
        bleu=bleu_score,
        verdict=verdict,
        rejection_detail=detail,
    )


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------


def score_candidates(
    original: str,
    candidates: Sequence[str],
    policy: SelectionPolicy = DEFAULT_POLICY,
    embedder: ProviderConfig = ProviderConfig(),
) -> list[ScoredCandidate]:
    """Score every candidate against the original.

    The original and all non-empty candidates are embedded in a single
    batched call; empty candidates skip embedding and report
    rejected_empty with zero scores. Output order matches input order.
    """
    if not original.strip():
        raise InputError("original text must be non-empty")
    nonempty = [c for c in candidates if c.strip()]
    vectors = embed([original, *nonempty], embedder)
    original_vec = vectors[0]
    vector_iter = iter(vectors[1:])
    reference_tokens = tokenize(original, policy.tokenization)

    scored: list[ScoredCandidate] = []
    for text in candidates:
        if not text.strip():
            scored.append(judge_candidate(text, 0.0, ZERO_ROUGE, None, policy))
            continue
        similarity = cosine_similarity(original_vec, next(vector_iter))
        candidate_tokens = tokenize(text, policy.tokenization)
        rouge = rouge_l(candidate_tokens, reference_tokens)
        bleu_score = (
            bleu(candidate_tokens, reference_tokens) if policy.compute_bleu else None
        )
        scored.append(judge_candidate(text, similarity, rouge, bleu_score, policy))
    return scored


def score_candidate(
    original: str,
    candidate: str,
    policy: SelectionPolicy = DEFAULT_POLICY,
    embedder: ProviderConfig = ProviderConfig(),
) -> ScoredCandidate:
    """Score a single candidate against the original."""
    return score_candidates(original, [candidate], policy, embedder)[0]


# ---------------------------------------------------------------------------
# Filtering and selection
# ---------------------------------------------------------------------------


def filter_candidates(
    scored: Sequence[ScoredCandidate],
) -> tuple[list[ScoredCandidate], list[ScoredCandidate]]:
    """Partition scored candidates into (accepted, rejected), order preserved."""
    accepted = [c for c in scored if c.verdict == "accepted"]
    rejected = [c for c in scored if c.verdict != "accepted"]
    return accepted, rejected


def select_best(accepted: Sequence[ScoredCandidate]) -> ScoredCandidate | None:
    """Pick the winner from an accepted-only list.

    Maximal similarity wins; ties break toward lower ROUGE-L f-measure
    (the more novel wording), then toward earlier position. Returns None
    for an empty list.
    """
    for candidate in accepted:
        if candidate.verdict != "accepted":
            raise InputError(
                f"select_best expects only accepted candidates, got {candidate.verdict}"
            )
    index = _best_index(accepted)
    return None if index is None else accepted[index]


def _best_index(scored: Sequence[ScoredCandidate]) -> int | None:
    """Index of the best accepted candidate, or None if none accepted."""
    best: int | None = None
    for i, candidate in enumerate(scored):
        if candidate.verdict != "accepted":
            continue
        if best is None:
            best = i
            continue
        incumbent = scored[best]
        # Strict comparison keeps the earlier index on full ties.
        if (candidate.similarity, -candidate.rouge_l.f_measure) > (
            incumbent.similarity,
            -incumbent.rouge_l.f_measure,
        ):
            best = i
    return best


def build_report(
    original: str,
    scored: Sequence[ScoredCandidate],
    policy: SelectionPolicy = DEFAULT_POLICY,
) -> SelectionReport:
    """Assemble a SelectionReport from already-scored candidates."""
    return SelectionReport(
        original=original,
        candidates=tuple(scored),
        selected_index=_best_index(scored),
        policy=policy,
    )


def paraphrase(
    original: str,
    params: SamplingParams = SamplingParams(),
    fmt: PromptFormat = PromptFormat(),
    policy: SelectionPolicy = DEFAULT_POLICY,
    backend: BackendConfig = BackendConfig(),
    embedder: ProviderConfig = ProviderConfig(),
) -> SelectionReport:
    """Run the full pipeline: generate, score, filter, select.

    Zero accepted candidates is not an error; the report simply carries
    no selected_index. Generation and embedding transport failures
    propagate.
    """
    candidates = generate_candidates(original, params, fmt, backend)
    if not candidates:
        return SelectionReport(
            original=original, candidates=(), selected_index=None, policy=policy
        )
    scored = score_candidates(original, candidates, policy, embedder)
    return build_report(original, scored, policy)


# ---------------------------------------------------------------------------
# JSON Lines serialization
# ---------------------------------------------------------------------------


def _rouge_to_dict(r: RougeScore) -> dict:
    return {"p": r.precision, "r": r.recall, "f": r.f_measure, "lcs": r.lcs_length}


def _rouge_from_dict(d: dict) -> RougeScore:
    return RougeScore(
        precision=d["p"], recall=d["r"], f_measure=d["f"], lcs_length=d["lcs"]
    )


def _bleu_to_dict(b: BleuScore | None) -> dict | None:
    if b is None:
        return None
    return {
        "score": b.score,
        "precisions": list(b.ngram_precisions),
        "bp": b.brevity_penalty,
    }


def _bleu_from_dict(d: dict | None) -> BleuScore | None:
    if d is None:
        return None
    return BleuScore(
        score=d["score"],
        ngram_precisions=tuple(d["precisions"]),
        brevity_penalty=d["bp"],
    )


def _policy_to_dict(policy: SelectionPolicy) -> dict:
    return {
        "rouge_max": policy.rouge_max,
        "similarity_min": policy.similarity_min,
        "similarity_max": policy.similarity_max,
        "compute_bleu": policy.compute_bleu,
        "tokenization": {
            "case_fold": policy.tokenization.case_fold,
            "punctuation_mode": policy.tokenization.punctuation_mode,
        },
    }


def _policy_from_dict(d: dict) -> SelectionPolicy:
    return SelectionPolicy(
        rouge_max=d["rouge_max"],
        similarity_min=d["similarity_min"],
        similarity_max=d["similarity_max"],
        compute_bleu=d["compute_bleu"],
        tokenization=TokenizationPolicy(
            case_fold=d["tokenization"]["case_fold"],
            punctuation_mode=d["tokenization"]["punctuation_mode"],
        ),
    )


def candidate_to_dict(c: ScoredCandidate) -> dict:
    """JSON form of one scored candidate."""
    return {
        "text": c.text,
        "similarity": c.similarity,
        "rouge_l": _rouge_to_dict(c.rouge_l),
        "bleu": _bleu_to_dict(c.bleu),
        "verdict": c.verdict,
        "rejection_detail": c.rejection_detail,
    }


def candidate_from_dict(d: dict) -> ScoredCandidate:
    """Rebuild a ScoredCandidate from its dict form."""
    return ScoredCandidate(
        text=d["text"],
        similarity=d["similarity"],
        rouge_l=_rouge_from_dict(d["rouge_l"]),
        bleu=_bleu_from_dict(d["bleu"]),
        verdict=d["verdict"],
        rejection_detail=d["rejection_detail"],
    )


def policy_to_dict(policy: SelectionPolicy) -> dict:
    """JSON form of a selection policy."""
    return _policy_to_dict(policy)


def report_to_dict(report: SelectionReport) -> dict:
    """Serialize a report to a plain dict with the documented field names."""
    return {
        "original": report.original,
        "candidates": [candidate_to_dict(c) for c in report.candidates],
        "selected_index": report.selected_index,
        "policy": _policy_to_dict(report.policy),
    }


def report_from_dict(d: dict) -> SelectionReport:
    """Rebuild a SelectionReport from its dict form."""
    return SelectionReport(
        original=d["original"],
        candidates=tuple(candidate_from_dict(c) for c in d["candidates"]),
        selected_index=d["selected_index"],
        policy=_policy_from_dict(d["policy"]),
    )


def report_to_json_line(report: SelectionReport) -> str:
    """One compact JSON line per report; non-ASCII text stays readable."""
    return json.dumps(report_to_dict(report), ensure_ascii=False)


def report_from_json_line(line: str) -> SelectionReport:
    return report_from_dict(json.loads(line))


def write_reports_jsonl(reports: Sequence[SelectionReport], path: str) -> None:
    """Write reports as JSON Lines, one report per line."""
    with open(path, "w", encoding="utf-8") as handle:
        for report in reports:
            handle.write(report_to_json_line(report) + "\n")


def read_reports_jsonl(path: str) -> list[SelectionReport]:
    """Read back a JSON Lines report file."""
    reports = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                reports.append(report_from_json_line(line))
    return reports

"""Lexical overlap metrics: tokenization, LCS, ROUGE-L, and sentence BLEU.

Everything here is a pure function over its inputs: no shared state, safe
to call from any number of threads. Scores operate on token sequences
produced by ``tokenize``, so the tokenization policy is an explicit,
auditable input rather than a hidden default.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Literal, Sequence

PunctuationMode = Literal["separate_tokens", "drop", "keep_attached"]
SmoothingMode = Literal["add_one", "none"]

PUNCTUATION_MODES: tuple[str, ...] = ("separate_tokens", "drop", "keep_attached")
SMOOTHING_MODES: tuple[str, ...] = ("add_one", "none")

# \w+ is a run of word characters, [^\w\s]+ a run of punctuation/symbols.
_WORD_OR_PUNCT = re.compile(r"\w+|[^\w\s]+")
_WORD_ONLY = re.compile(r"\w+")


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TokenizationPolicy:
    """How raw text becomes a token sequence before metric computation.

    ``case_fold`` lowercases (Unicode casefold) before splitting.
    ``punctuation_mode`` is one of:

    * ``separate_tokens``: each run of punctuation becomes its own token,
    * ``drop``: punctuation is discarded entirely,
    * ``keep_attached``: plain whitespace split, punctuation stays on words.

    Whitespace handling is fixed: splits occur on Unicode whitespace.
    """

    case_fold: bool = True
    punctuation_mode: PunctuationMode = "separate_tokens"

    def __post_init__(self) -> None:
        if self.punctuation_mode not in PUNCTUATION_MODES:
            raise ValueError(
                f"punctuation_mode must be one of {PUNCTUATION_MODES}, "
                f"got {self.punctuation_mode!r}"
            )


DEFAULT_TOKENIZATION = TokenizationPolicy()


def tokenize(text: str, policy: TokenizationPolicy = DEFAULT_TOKENIZATION) -> list[str]:
    """Split ``text`` into tokens under ``policy``. Empty text yields []."""
    if policy.case_fold:
        text = text.casefold()
    if policy.punctuation_mode == "separate_tokens":
        return _WORD_OR_PUNCT.findall(text)
    if policy.punctuation_mode == "drop":
        return _WORD_ONLY.findall(text)
    return text.split()


# ---------------------------------------------------------------------------
# Longest common subsequence
# ---------------------------------------------------------------------------

def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence of ``a`` and ``b``.

    Dynamic programming over two rows: O(|a|*|b|) time, O(min(|a|,|b|))
    working memory.
    """
    if len(a) < len(b):
        a, b = b, a
    n = len(b)
    if n == 0:
        return 0
    prev = [0] * (n + 1)
    for x in a:
        curr = [0] * (n + 1)
        for j in range(1, n + 1):
            if x == b[j - 1]:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[n]


# ---------------------------------------------------------------------------
# ROUGE-L
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RougeScore:
    """LCS-based precision/recall/F-measure between candidate and reference."""

    precision: float
    recall: float
    f_measure: float
    lcs_length: int


ZERO_ROUGE = RougeScore(0.0, 0.0, 0.0, 0)


def rouge_l(
    candidate: Sequence[str],
    reference: Sequence[str],
    beta: float = 1.0,
) -> RougeScore:
    """ROUGE-L over token sequences.

    recall = LCS/|reference|, precision = LCS/|candidate|,
    F = (1 + beta^2) * P * R / (R + beta^2 * P). Either sequence empty, or
    no common subsequence, gives all-zero scores.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not candidate or not reference:
        return ZERO_ROUGE
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return ZERO_ROUGE
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    beta2 = beta * beta
    f_measure = (1 + beta2) * precision * recall / (recall + beta2 * precision)
    return RougeScore(precision, recall, f_measure, lcs)


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BleuScore:
    """Sentence BLEU: clipped n-gram precisions combined under a brevity penalty."""

    score: float
    ngram_precisions: tuple[float, ...]
    brevity_penalty: float


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    candidate: Sequence[str],
    reference: Sequence[str],
    max_n: int = 4,
    smoothing: SmoothingMode = "add_one",
) -> BleuScore:
    """Sentence-level BLEU of ``candidate`` against one ``reference``.

    Modified n-gram precision clips candidate n-gram counts against the
    reference's. With ``add_one`` smoothing, orders n >= 2 use
    (matches + 1) / (total + 1), which keeps short single-reference pairs
    off the zero floor; ``none`` reproduces the unsmoothed definition.
    Brevity penalty is exp(1 - |reference|/|candidate|) for candidates
    shorter than the reference, else 1. Empty input gives a zero score.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}, got {smoothing!r}")
    if not candidate or not reference:
        return BleuScore(0.0, (0.0,) * max_n, 1.0)

    precisions: list[float] = []
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        matches = sum(min(c, ref_counts.get(gram, 0)) for gram, c in cand_counts.items())
        total = sum(cand_counts.values())
        if smoothing == "add_one" and n >= 2:
            precisions.append((matches + 1) / (total + 1))
        else:
            precisions.append(matches / total if total else 0.0)

    if len(candidate) >= len(reference):
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - len(reference) / len(candidate))

    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = brevity_penalty * math.exp(
            sum(math.log(p) for p in precisions) / max_n
        )
    return BleuScore(score, tuple(precisions), brevity_penalty)

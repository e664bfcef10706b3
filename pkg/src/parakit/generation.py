"""Client for a conditional text-generation backend.

Prompts pair the original text with a separator sequence; the backend's
continuation after the separator is the candidate paraphrase. The remote
backend speaks a small JSON protocol; a fixture-driven stub backend (a
prompt -> canned completions mapping) ships for tests and offline runs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import requests

from .errors import ContractError, InputError, TransportError

GEN_URL_ENV = "PARAKIT_GEN_URL"

FinishReason = Literal["stop_token", "length", "end_of_example"]


@dataclass(frozen=True)
class PromptFormat:
    """Separator conventions joining an original text and its paraphrase.

    Prompts and training examples place a single space on both sides of
    the separator; ``end_of_example`` terminates one training example.
    """

    separator: str = ">>>>"
    end_of_example: str = "<|endoftext|>"

    def __post_init__(self) -> None:
        if not self.separator:
            raise ValueError("separator must be non-empty")
        if not self.end_of_example:
            raise ValueError("end_of_example must be non-empty")


@dataclass(frozen=True)
class SamplingParams:
    """Sampling knobs forwarded to the generation backend.

    Pure temperature sampling by default; top_k stays off unless set.
    """

    n_candidates: int = 10
    max_new_tokens: int = 256
    temperature: float = 1.0
    top_k: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.n_candidates < 1:
            raise ValueError(f"n_candidates must be >= 1, got {self.n_candidates}")
        if self.max_new_tokens < 1:
            raise ValueError(f"max_new_tokens must be >= 1, got {self.max_new_tokens}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError(f"top_k must be >= 1 when set, got {self.top_k}")


@dataclass(frozen=True)
class RawCompletion:
    """One backend completion (prompt excluded) and how it ended."""

    text: str
    finish_reason: FinishReason


@dataclass(frozen=True)
class ParaphrasePair:
    """An (original, paraphrase) text pair."""

    original: str
    paraphrase: str
    source_id: str | None = None

    def __post_init__(self) -> None:
        if not self.original or not self.paraphrase:
            raise ValueError("both texts of a pair must be non-empty")


@dataclass(frozen=True)
class BackendConfig:
    """How to reach the generation backend.

    ``remote`` posts to ``{endpoint}/v1/generate`` (PARAKIT_GEN_URL
    overrides the configured endpoint). ``stub`` serves canned
    completions from ``fixtures``, keyed by the full prompt or by the
    bare original text.
    """

    kind: Literal["remote", "stub"] = "remote"
    endpoint: str | None = None
    timeout: float = 30.0
    retries: int = 2
    fixtures: Mapping[str, Sequence[str]] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("remote", "stub"):
            raise ValueError(f"kind must be 'remote' or 'stub', got {self.kind!r}")
        if self.kind == "stub" and self.fixtures is None:
            raise ValueError("stub backend requires fixtures")
        if self.retries < 0:
            raise ValueError(f"retries must be >= 0, got {self.retries}")


def format_prompt(original: str, fmt: PromptFormat = PromptFormat()) -> str:
    """Build the conditional prompt: original, one space, separator, one space.

    The backend's continuation is then exactly the candidate region.
    """
    if not original:
        raise InputError("original text must be non-empty")
    if fmt.separator in original:
        raise InputError(
            f"original text contains the separator {fmt.separator!r}; "
            "parsing would be ambiguous"
        )
    return f"{original} {fmt.separator} "


def parse_completion(raw: str, fmt: PromptFormat = PromptFormat()) -> str:
    """Extract the candidate paraphrase from a raw completion.

    Truncates at the first end-of-example marker, then at the first
    separator (a runaway generation starting a new example), and trims
    surrounding whitespace. Interior newlines survive, so whole-paragraph
    candidates pass through intact. An empty result means the completion
    carried no candidate; callers drop it.
    """
    text = raw.split(fmt.end_of_example, 1)[0]
    text = text.split(fmt.separator, 1)[0]
    return text.strip()


def classify_completion(raw: str, fmt: PromptFormat = PromptFormat()) -> RawCompletion:
    """Wrap a raw completion with the reason generation stopped."""
    if fmt.end_of_example in raw:
        reason: FinishReason = "end_of_example"
    elif fmt.separator in raw:
        reason = "stop_token"
    else:
        reason = "length"
    return RawCompletion(text=raw, finish_reason=reason)


def load_stub_fixtures(path: str) -> dict[str, list[str]]:
    """Load a stub-backend fixture file.

    The file holds one JSON object mapping a prompt (or the bare original
    text) to its list of canned completions; the empty-string key feeds
    unconditional sampling.
    """
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise InputError("stub fixture file must hold a JSON object")
    fixtures: dict[str, list[str]] = {}
    for key, value in payload.items():
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            raise InputError(
                f"stub fixture value for {key!r} must be a list of strings"
            )
        fixtures[key] = list(value)
    return fixtures


def _resolve_endpoint(backend: BackendConfig) -> str:
    endpoint = os.environ.get(GEN_URL_ENV) or backend.endpoint
    if not endpoint:
        raise InputError(
            f"remote generation backend needs an endpoint (config or {GEN_URL_ENV})"
        )
    return endpoint.rstrip("/")


def _request_completions(
    prompt: str,
    params: SamplingParams,
    stop: list[str],
    backend: BackendConfig,
) -> list[str]:
    if backend.kind == "stub":
        assert backend.fixtures is not None
        canned = backend.fixtures.get(prompt)
        if canned is None and prompt.endswith(" "):
            # Fixture files may key on the bare original rather than the
            # formatted prompt; strip the " <sep> " suffix and retry.
            for key in backend.fixtures:
                if prompt.startswith(key) and prompt[len(key):].strip() in stop:
                    canned = backend.fixtures[key]
                    break
        if canned is None:
            return []
        return [str(c) for c in canned[: params.n_candidates]]

    endpoint = _resolve_endpoint(backend)
    url = f"{endpoint}/v1/generate"
    body = {
        "prompt": prompt,
        "n": params.n_candidates,
        "max_tokens": params.max_new_tokens,
        "temperature": params.temperature,
        "top_k": params.top_k,
        "stop": stop,
        "seed": params.seed,
    }
    last_error: Exception | None = None
    for _attempt in range(backend.retries + 1):
        try:
            response = requests.post(url, json=body, timeout=backend.timeout)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code != 200:
            last_error = TransportError(
                f"generation endpoint returned HTTP {response.status_code}"
            )
            if 400 <= response.status_code < 500:
                raise last_error
            continue
        try:
            completions = response.json()["completions"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ContractError(f"malformed generation response: {exc}") from exc
        if not isinstance(completions, list) or not all(
            isinstance(c, str) for c in completions
        ):
            raise ContractError("generation response 'completions' must be a list of strings")
        return completions
    if isinstance(last_error, TransportError):
        raise last_error
    raise TransportError(
        f"generation endpoint unreachable after {backend.retries + 1} attempts: {last_error}"
    )


def generate_candidates(
    original: str,
    params: SamplingParams = SamplingParams(),
    fmt: PromptFormat = PromptFormat(),
    backend: BackendConfig = BackendConfig(),
) -> list[str]:
    """Generate candidate paraphrases for ``original``.

    Formats the prompt, requests ``n_candidates`` completions, parses
    each completion into a candidate, drops empty candidates, and
    deduplicates exact matches keeping first-appearance order. May return
    fewer candidates than requested.
    """
    prompt = format_prompt(original, fmt)
    stop = [fmt.end_of_example, fmt.separator]
    completions = _request_completions(prompt, params, stop, backend)
    parsed = (parse_completion(raw, fmt) for raw in completions)
    return list(dict.fromkeys(text for text in parsed if text))


def sample_naive(
    params: SamplingParams = SamplingParams(),
    fmt: PromptFormat = PromptFormat(),
    backend: BackendConfig = BackendConfig(),
) -> list[ParaphrasePair]:
    """Sample unconditional completions and keep the well-formed pairs.

    A completion that splits into exactly one (original, paraphrase) pair
    around the separator resembles a training example; anything else is
    discarded. Useful for eyeballing how well the backend has absorbed
    the pair format.
    """
    if backend.kind == "stub":
        assert backend.fixtures is not None
        completions = [str(c) for c in backend.fixtures.get("", [])[: params.n_candidates]]
    else:
        completions = _request_completions("", params, [fmt.end_of_example], backend)
    pairs: list[ParaphrasePair] = []
    for raw in completions:
        text = raw.split(fmt.end_of_example, 1)[0]
        parts = text.split(fmt.separator)
        if len(parts) != 2:
            continue
        original, paraphrase = parts[0].strip(), parts[1].strip()
        if original and paraphrase:
            pairs.append(ParaphrasePair(original=original, paraphrase=paraphrase))
    return pairs

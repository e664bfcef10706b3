"""Command-line interface.

Subcommands: score, paraphrase, stats, build-train, calibrate,
config-dump. Every command writes machine-parseable JSON or JSON Lines
to stdout (or --out) and keeps diagnostics on stderr. Settings resolve
as flag over config-file over built-in default; endpoint environment
variables (PARAKIT_GEN_URL, PARAKIT_EMBED_URL) override configured
endpoints at request time. Exit codes: 0 success, 1 runtime or
transport failure, 2 usage error.

A --gen-url (or PARAKIT_GEN_URL) value of the form ``stub:<path>``
selects the deterministic stub backend with fixtures loaded from the
given JSON file instead of a remote endpoint.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Sequence

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .corpus import (
    PAIR_FORMATS,
    calibrate_tokenization,
    calibration_to_dict,
    build_train_file,
    load_calibration_fixtures,
    load_pairs,
    score_pairs,
    stats_from_scored,
    stats_to_dict,
)
from .embeddings import ProviderConfig
from .errors import ContractError, EmptyDatasetError, InputError, TransportError
from .generation import (
    GEN_URL_ENV,
    BackendConfig,
    PromptFormat,
    SamplingParams,
    load_stub_fixtures,
)
from .selection import (
    SelectionPolicy,
    candidate_to_dict,
    paraphrase,
    policy_to_dict,
    report_to_json_line,
    score_candidate,
)
from .text_metrics import PUNCTUATION_MODES, TokenizationPolicy

STUB_SCHEME = "stub:"

CONFIG_KEYS = frozenset(
    {
        "separator",
        "end_of_example",
        "rouge_max",
        "similarity_min",
        "similarity_max",
        "compute_bleu",
        "case_fold",
        "punctuation_mode",
        "n_candidates",
        "max_new_tokens",
        "temperature",
        "top_k",
        "seed",
        "embedder",
        "gen_url",
        "embed_url",
        "timeout",
        "retries",
        "max_batch",
        "max_concurrency",
        "format",
        "quality_filter",
    }
)


@dataclass(frozen=True)
class AppConfig:
    """Effective settings after flag/config-file/default resolution."""

    policy: SelectionPolicy
    fmt: PromptFormat
    sampling: SamplingParams
    embedder: ProviderConfig
    backend: BackendConfig
    pair_format: str
    quality_filter: bool


def _load_config_file(path: str) -> dict:
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise InputError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    return data


def _pick(flag_value, cfg: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    return cfg.get(key, default)


def resolve_config(args: argparse.Namespace) -> AppConfig:
    """Merge flags, the optional config file, and built-in defaults."""
    cfg = _load_config_file(args.config) if args.config else {}
    policy = SelectionPolicy(
        rouge_max=_pick(args.rouge_max, cfg, "rouge_max", 0.7),
        similarity_min=_pick(args.similarity_min, cfg, "similarity_min", 0.85),
        similarity_max=cfg.get("similarity_max"),
        compute_bleu=cfg.get("compute_bleu", True),
        tokenization=TokenizationPolicy(
            case_fold=cfg.get("case_fold", True),
            punctuation_mode=cfg.get("punctuation_mode", "separate_tokens"),
        ),
    )
    fmt = PromptFormat(
        separator=_pick(args.separator, cfg, "separator", ">>>>"),
        end_of_example=cfg.get("end_of_example", "<|endoftext|>"),
    )
    sampling = SamplingParams(
        n_candidates=_pick(args.n_candidates, cfg, "n_candidates", 10),
        max_new_tokens=cfg.get("max_new_tokens", 256),
        temperature=_pick(args.temperature, cfg, "temperature", 1.0),
        top_k=_pick(args.top_k, cfg, "top_k", None),
        seed=cfg.get("seed"),
    )
    timeout = cfg.get("timeout")
    retries = cfg.get("retries")
    embedder_kind = _pick(args.embedder, cfg, "embedder", "fallback")
    embedder = ProviderConfig(
        kind=embedder_kind,
        endpoint=_pick(args.embed_url, cfg, "embed_url", None)
        if embedder_kind == "remote"
        else None,
        timeout=timeout if timeout is not None else 10.0,
        max_batch=cfg.get("max_batch", 32),
        retries=retries if retries is not None else 2,
        max_concurrency=cfg.get("max_concurrency", 1),
    )
    # The environment overrides configured generation endpoints, and the
    # stub-vs-remote decision must follow whichever value wins.
    gen_url = os.environ.get(GEN_URL_ENV) or _pick(args.gen_url, cfg, "gen_url", None)
    if gen_url and gen_url.startswith(STUB_SCHEME):
        backend = BackendConfig(
            kind="stub",
            fixtures=load_stub_fixtures(gen_url[len(STUB_SCHEME):]),
            timeout=timeout if timeout is not None else 30.0,
            retries=retries if retries is not None else 2,
        )
    else:
        backend = BackendConfig(
            kind="remote",
            endpoint=gen_url,
            timeout=timeout if timeout is not None else 30.0,
            retries=retries if retries is not None else 2,
        )
    return AppConfig(
        policy=policy,
        fmt=fmt,
        sampling=sampling,
        embedder=embedder,
        backend=backend,
        pair_format=_pick(getattr(args, "pair_format", None), cfg, "format", "jsonl"),
        quality_filter=False
        if getattr(args, "all_rows", False)
        else cfg.get("quality_filter", True),
    )


def config_to_dict(config: AppConfig) -> dict:
    """Effective configuration in JSON form (config-dump output)."""
    backend = config.backend
    return {
        "policy": policy_to_dict(config.policy),
        "prompt_format": {
            "separator": config.fmt.separator,
            "end_of_example": config.fmt.end_of_example,
        },
        "sampling": {
            "n_candidates": config.sampling.n_candidates,
            "max_new_tokens": config.sampling.max_new_tokens,
            "temperature": config.sampling.temperature,
            "top_k": config.sampling.top_k,
            "seed": config.sampling.seed,
        },
        "embedder": {
            "kind": config.embedder.kind,
            "endpoint": config.embedder.endpoint,
            "timeout": config.embedder.timeout,
            "max_batch": config.embedder.max_batch,
            "retries": config.embedder.retries,
            "max_concurrency": config.embedder.max_concurrency,
        },
        "generator": {
            "kind": backend.kind,
            "endpoint": backend.endpoint,
            "timeout": backend.timeout,
            "retries": backend.retries,
            "n_fixtures": len(backend.fixtures) if backend.fixtures else 0,
        },
        "dataset": {
            "format": config.pair_format,
            "quality_filter": config.quality_filter,
        },
    }


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, ensure_ascii=False)
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _emit_lines(lines: Sequence[str], out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            for line in lines:
                handle.write(line + "\n")
    else:
        for line in lines:
            print(line)


def _figure_path(directory: str, name: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)


def _read_text_arg(text: str | None, path: str | None) -> str:
    if text is not None:
        return text
    assert path is not None
    with open(path, encoding="utf-8") as handle:
        return handle.read().rstrip("\n")


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def cmd_score(args: argparse.Namespace, config: AppConfig) -> int:
    original = _read_text_arg(args.original, args.original_file)
    candidate = _read_text_arg(args.candidate, args.candidate_file)
    scored = score_candidate(original, candidate, config.policy, config.embedder)
    payload = candidate_to_dict(scored)
    payload["embedder_kind"] = config.embedder.kind
    _emit_json(payload, getattr(args, "out", None))
    return 0


def cmd_paraphrase(args: argparse.Namespace, config: AppConfig) -> int:
    if args.text is not None:
        originals = [args.text]
    else:
        with open(args.input, encoding="utf-8") as handle:
            originals = [line.rstrip("\n") for line in handle if line.strip()]
    lines: list[str] = []
    reports = []
    failed = False
    for original in originals:
        try:
            report = paraphrase(
                original,
                params=config.sampling,
                fmt=config.fmt,
                policy=config.policy,
                backend=config.backend,
                embedder=config.embedder,
            )
        except (TransportError, ContractError) as exc:
            failed = True
            lines.append(
                json.dumps({"original": original, "error": str(exc)}, ensure_ascii=False)
            )
            continue
        reports.append(report)
        lines.append(report_to_json_line(report))
    _emit_lines(lines, args.out)
    if args.figures and reports:
        from .figures import render_selection_figure

        path = render_selection_figure(reports, _figure_path(args.figures, "selection.png"))
        print(f"wrote {path}", file=sys.stderr)
    return 1 if failed else 0


def cmd_stats(args: argparse.Namespace, config: AppConfig) -> int:
    pairs = load_pairs(args.dataset, config.pair_format, config.quality_filter)
    scored = score_pairs(pairs, config.policy, config.embedder)
    if config.embedder.kind == "fallback":
        print(
            "note: similarity means use the fallback hashing embedder and are "
            "not comparable to scores from a sentence-encoder backend",
            file=sys.stderr,
        )
    payload = stats_to_dict(stats_from_scored(scored), config.embedder.kind)
    _emit_json(payload, args.out)
    if args.figures:
        from .figures import render_stats_figure

        path = render_stats_figure(scored, _figure_path(args.figures, "stats.png"))
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_build_train(args: argparse.Namespace, config: AppConfig) -> int:
    pairs = load_pairs(args.dataset, config.pair_format, config.quality_filter)
    written = build_train_file(pairs, config.fmt, args.out)
    payload = {
        "examples_written": written,
        "skipped": len(pairs) - written,
        "out": args.out,
    }
    _emit_json(payload, None)
    return 0


def cmd_calibrate(args: argparse.Namespace, config: AppConfig) -> int:
    fixtures = load_calibration_fixtures(args.fixtures) if args.fixtures else None
    report = calibrate_tokenization(fixtures)
    _emit_json(calibration_to_dict(report), args.out)
    if args.figures:
        from .figures import render_calibration_figure

        path = render_calibration_figure(report, _figure_path(args.figures, "calibration.png"))
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_config_dump(args: argparse.Namespace, config: AppConfig) -> int:
    _emit_json(config_to_dict(config), None)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", help="TOML config file")
    shared.add_argument("--separator", help="separator between original and paraphrase")
    shared.add_argument("--rouge-max", type=float, dest="rouge_max")
    shared.add_argument("--similarity-min", type=float, dest="similarity_min")
    shared.add_argument("--n-candidates", type=int, dest="n_candidates")
    shared.add_argument("--temperature", type=float)
    shared.add_argument("--top-k", type=int, dest="top_k")
    shared.add_argument("--embedder", choices=["remote", "fallback"])
    shared.add_argument(
        "--gen-url",
        dest="gen_url",
        help=f"generation endpoint, or {STUB_SCHEME}<path> for the stub backend",
    )
    shared.add_argument("--embed-url", dest="embed_url", help="embedding endpoint")

    parser = argparse.ArgumentParser(
        prog="parakit",
        description="Paraphrase candidate generation, scoring, filtering, and selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "score", parents=[shared], help="score one candidate against an original"
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--original", help="original text")
    group.add_argument("--original-file", dest="original_file", metavar="PATH")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--candidate", help="candidate paraphrase text")
    group.add_argument("--candidate-file", dest="candidate_file", metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser(
        "paraphrase",
        parents=[shared],
        help="generate, score, filter, and select paraphrases",
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", help="one original text")
    group.add_argument("--input", metavar="PATH", help="file with one original per line")
    p.add_argument("--out", metavar="PATH", help="write JSONL here instead of stdout")
    p.add_argument("--figures", metavar="DIR", help="also render score figures here")
    p.set_defaults(handler=cmd_paraphrase)

    p = sub.add_parser("stats", parents=[shared], help="dataset-average scores")
    p.add_argument("dataset", help="dataset file")
    p.add_argument("--format", choices=list(PAIR_FORMATS), dest="pair_format")
    p.add_argument(
        "--all-rows",
        action="store_true",
        dest="all_rows",
        help="keep rows regardless of quality label (msr_tsv)",
    )
    p.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p.add_argument("--figures", metavar="DIR", help="also render histograms here")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser(
        "build-train", parents=[shared], help="emit a fine-tuning text file"
    )
    p.add_argument("dataset", help="dataset file")
    p.add_argument("--format", choices=list(PAIR_FORMATS), dest="pair_format")
    p.add_argument(
        "--all-rows",
        action="store_true",
        dest="all_rows",
        help="keep rows regardless of quality label (msr_tsv)",
    )
    p.add_argument("--out", metavar="PATH", required=True, help="training file to write")
    p.set_defaults(handler=cmd_build_train)

    p = sub.add_parser(
        "calibrate",
        parents=[shared],
        help="sweep tokenization settings against known-score pairs",
    )
    p.add_argument("--fixtures", metavar="PATH", help="fixture JSON (default: bundled)")
    p.add_argument("--out", metavar="PATH", help="write JSON here instead of stdout")
    p.add_argument("--figures", metavar="DIR", help="also render the error chart here")
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser(
        "config-dump", parents=[shared], help="print the effective configuration"
    )
    p.set_defaults(handler=cmd_config_dump)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        config = resolve_config(args)
        return args.handler(args, config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TransportError, ContractError, EmptyDatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UnicodeDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

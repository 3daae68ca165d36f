"""Command-line entry points.

Exit codes: 0 on success, 1 when a provider failed, 2 for usage or input
problems, so scripts can tell flaky infrastructure from their own mistakes.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import (
    AppConfig,
    ConfigError,
    apply_overrides,
    load_config,
    make_annotator,
    make_generation_client,
)
from .control import GenerationRequest, controlled_generate, verify_roundtrip
from .fusion import TagToken
from .pipeline import (
    RawExample,
    RecordError,
    StatsAccumulator,
    annotated_from_dict,
    corpus_stats,
    emit_finetune,
    to_json_line,
)
from .providers import ProviderUnavailable

EXIT_OK = 0
EXIT_PROVIDER = 1
EXIT_USAGE = 2


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read_input(inline: str | None, file_path: str | None, name: str, required: bool = True) -> str:
    if inline is not None and file_path is not None:
        _fail(EXIT_USAGE, f"pass --{name} or --{name}-file, not both")
    if inline is not None:
        return inline
    if file_path is not None:
        try:
            return Path(file_path).read_text(encoding="utf-8")
        except OSError as exc:
            _fail(EXIT_USAGE, f"cannot read {name} file: {exc}")
    if required:
        _fail(EXIT_USAGE, f"--{name} or --{name}-file is required")
    return ""


@click.group()
@click.option("--config", "config_path", type=str, default=None, help="TOML config file.")
@click.option("--weights", default=None, help="Fusion weights as L,S,J (renormalized).")
@click.option("--levels", type=int, default=None, help="Tag levels (default 10).")
@click.option("--workers", type=int, default=None, help="Annotation worker threads.")
@click.option("--mock-providers", is_flag=True, help="Use the offline mock providers.")
@click.pass_context
def main(ctx, config_path, weights, levels, workers, mock_providers):
    """Faithfulness scoring, tagging, and dataset tooling."""
    try:
        config = load_config(config_path)
        config = apply_overrides(
            config,
            weights=weights,
            levels=levels,
            workers=workers,
            mock_providers=mock_providers,
        )
    except ConfigError as exc:
        _fail(EXIT_USAGE, str(exc))
    ctx.obj = config


@main.command()
@click.option("--knowledge", "-k", default=None)
@click.option("--knowledge-file", default=None, type=str)
@click.option("--response", "-r", default=None)
@click.option("--response-file", default=None, type=str)
@click.option("--context", default=None)
@click.option("--context-file", default=None, type=str)
@click.pass_obj
def score(config: AppConfig, knowledge, knowledge_file, response, response_file, context, context_file):
    """Score one knowledge/response pair; breakdown JSON on stdout."""
    knowledge_text = _read_input(knowledge, knowledge_file, "knowledge")
    response_text = _read_input(response, response_file, "response")
    context_text = _read_input(context, context_file, "context", required=False)
    try:
        example = RawExample(
            id="cli", context=context_text, knowledge=knowledge_text, response=response_text
        )
    except ValueError as exc:
        _fail(EXIT_USAGE, str(exc))
    try:
        annotated = make_annotator(config).annotate(example)
    except ProviderUnavailable as exc:
        _fail(EXIT_PROVIDER, str(exc))
    result = annotated.breakdown.as_dict()
    result["tag"] = annotated.tag.level
    result["flags"] = sorted(annotated.flags)
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.argument("input_path", type=str)
@click.argument("output_path", type=str)
@click.pass_obj
def annotate(config: AppConfig, input_path, output_path):
    """Annotate a JSONL corpus; stats on stderr, errors to a sidecar file."""
    annotator = make_annotator(config)
    acc = StatsAccumulator()
    errors: list[RecordError] = []
    annotated_count = 0
    try:
        with open(input_path, "rb") as source, open(
            output_path, "w", encoding="utf-8"
        ) as sink:
            for item in annotator.iter_corpus(source, workers=config.workers):
                if isinstance(item, RecordError):
                    errors.append(item)
                else:
                    sink.write(to_json_line(item.as_dict()) + "\n")
                    acc.add(item)
                    annotated_count += 1
    except OSError as exc:
        _fail(EXIT_USAGE, str(exc))

    if errors:
        error_path = output_path + ".errors.jsonl"
        with open(error_path, "w", encoding="utf-8") as fh:
            for error in errors:
                fh.write(to_json_line(error.as_dict()) + "\n")
        click.echo(f"{len(errors)} record error(s) written to {error_path}", err=True)

    stats = acc.finish()
    click.echo(json.dumps(stats.as_dict(), indent=2), err=True)

    total = annotated_count + len(errors)
    if total and len(errors) / total > config.error_rate_threshold:
        provider_caused = any("provider" in e.reason for e in errors)
        click.echo(
            f"error rate {len(errors)}/{total} exceeds threshold "
            f"{config.error_rate_threshold}",
            err=True,
        )
        sys.exit(EXIT_PROVIDER if provider_caused else EXIT_USAGE)


@main.command()
@click.argument("input_path", type=str)
@click.argument("output_path", type=str)
@click.pass_obj
def emit(config: AppConfig, input_path, output_path):
    """Turn an annotated JSONL file into fine-tune prompt/completion records."""
    total = 0
    emitted = 0
    try:
        with open(input_path, "r", encoding="utf-8") as source, open(
            output_path, "w", encoding="utf-8"
        ) as sink:
            for line in source:
                if not line.strip():
                    continue
                total += 1
                try:
                    example = annotated_from_dict(json.loads(line), config.levels)
                except (ValueError, KeyError, TypeError) as exc:
                    _fail(EXIT_USAGE, f"bad annotated record on line {total}: {exc}")
                for record in emit_finetune([example]):
                    sink.write(to_json_line(record) + "\n")
                    emitted += 1
    except OSError as exc:
        _fail(EXIT_USAGE, str(exc))
    click.echo(f"emitted {emitted} records, skipped {total - emitted}", err=True)


@main.command()
@click.argument("input_path", type=str)
@click.pass_obj
def stats(config: AppConfig, input_path):
    """Corpus statistics for an annotated JSONL file; JSON on stdout."""
    examples = []
    try:
        with open(input_path, "r", encoding="utf-8") as source:
            for number, line in enumerate(source, start=1):
                if not line.strip():
                    continue
                try:
                    examples.append(annotated_from_dict(json.loads(line), config.levels))
                except (ValueError, KeyError, TypeError) as exc:
                    _fail(EXIT_USAGE, f"bad annotated record on line {number}: {exc}")
    except OSError as exc:
        _fail(EXIT_USAGE, str(exc))
    click.echo(json.dumps(corpus_stats(examples).as_dict(), indent=2))


def _generation_request(config, knowledge, knowledge_file, context, context_file, tag, temperature, max_tokens):
    knowledge_text = _read_input(knowledge, knowledge_file, "knowledge")
    context_text = _read_input(context, context_file, "context", required=False)
    if not 0 <= tag <= config.levels:
        _fail(EXIT_USAGE, f"tag must be in [0, {config.levels}]")
    try:
        return GenerationRequest(
            context=context_text,
            knowledge=knowledge_text,
            tag=TagToken(tag, levels=config.levels),
            temperature=temperature if temperature is not None else config.llm.temperature,
            max_tokens=max_tokens,
        )
    except ValueError as exc:
        _fail(EXIT_USAGE, str(exc))


generation_options = [
    click.option("--knowledge", "-k", default=None),
    click.option("--knowledge-file", default=None, type=str),
    click.option("--context", default=None),
    click.option("--context-file", default=None, type=str),
    click.option("--tag", type=int, required=True, help="Requested faithfulness level."),
    click.option("--temperature", type=float, default=None),
    click.option("--max-tokens", type=int, default=None),
]


def _with_generation_options(fn):
    for option in reversed(generation_options):
        fn = option(fn)
    return fn


@main.command()
@_with_generation_options
@click.pass_obj
def generate(config: AppConfig, knowledge, knowledge_file, context, context_file, tag, temperature, max_tokens):
    """Generate a response conditioned on a requested tag."""
    request = _generation_request(
        config, knowledge, knowledge_file, context, context_file, tag, temperature, max_tokens
    )
    try:
        client = make_generation_client(config)
    except ConfigError as exc:
        _fail(EXIT_USAGE, str(exc))
    try:
        click.echo(controlled_generate(request, client, config.llm.retry))
    except ProviderUnavailable as exc:
        _fail(EXIT_PROVIDER, str(exc))


@main.command()
@_with_generation_options
@click.pass_obj
def verify(config: AppConfig, knowledge, knowledge_file, context, context_file, tag, temperature, max_tokens):
    """Generate at a requested tag, re-score the output, report the deviation."""
    request = _generation_request(
        config, knowledge, knowledge_file, context, context_file, tag, temperature, max_tokens
    )
    try:
        client = make_generation_client(config)
    except ConfigError as exc:
        _fail(EXIT_USAGE, str(exc))
    try:
        report = verify_roundtrip(request, client, make_annotator(config), config.llm.retry)
    except ProviderUnavailable as exc:
        _fail(EXIT_PROVIDER, str(exc))
    payload = {"requested_tag": request.tag.level, **report.as_dict()}
    click.echo(json.dumps(payload, indent=2))


@main.command()
@click.option("--bind", default=None, help="host:port (default from config).")
@click.option("--static-dir", default=None, help="Directory of playground assets to serve.")
@click.pass_obj
def serve(config: AppConfig, bind, static_dir):
    """Run the HTTP service until interrupted."""
    import uvicorn

    from .config import ServiceConfig
    from .service import create_app

    service = config.service
    try:
        if bind is not None or static_dir is not None:
            service = ServiceConfig(
                bind=bind if bind is not None else service.bind,
                static_dir=static_dir if static_dir is not None else service.static_dir,
                cors_origins=service.cors_origins,
                max_concurrent=service.max_concurrent,
            )
        from dataclasses import replace

        app = create_app(replace(config, service=service))
    except (ConfigError, ValueError) as exc:
        _fail(EXIT_USAGE, str(exc))
    uvicorn.run(app, host=service.host, port=service.port, log_level="info")


if __name__ == "__main__":
    main()

"""Command-line interface.

Thin wrappers over the library: segment+align, evaluate a corpus, compare
rankings, generate preference pairs, compute rewards, and serve the HTTP
API.  Configuration precedence: flags > DOCASD_* environment variables >
--config file > defaults.  Exit codes: 0 success, 1 usage, 2 data error,
3 scorer unavailable.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
from click.core import ParameterSource

from . import __version__
from .config import RunConfig
from .datapipe import (
    build_preference_pairs,
    read_corpus,
    evaluate_corpus,
    reward_batch,
    write_preference_file,
)
from .errors import DataError, DocasdError, RecordSkipped, ScorerUnavailable
from .ranking import SystemScore, correlate_rankings, load_ranking_file
from .report import (
    build_report,
    document_entry,
    read_report,
    render_systems_tsv,
    report_system_scores,
    systems_from_documents,
    write_report,
)
from .alignment import align_document
from .segmentation import SegmenterConfig

_CONFIG_KEYS = (
    "metric_align", "metric_eval", "ks", "dp_mode", "forbid_zero_step",
    "placeholder", "joiner", "sidecar_url", "batch_size", "cache_dir",
    "workers", "segmenter", "segmenter_command",
)


def config_options(command):
    """Shared pipeline configuration flags."""
    options = [
        click.option("--metric-align", default="asd-align", show_default=True,
                     envvar="DOCASD_METRIC_ALIGN",
                     help="Metric for the sentence-pair similarity matrix."),
        click.option("--metric-eval", default="lexical", show_default=True,
                     envvar="DOCASD_METRIC_EVAL",
                     help="Metric for sliding-chunk evaluation."),
        click.option("--ks", default="1,2,3,4", show_default=True,
                     envvar="DOCASD_KS", help="Chunk sizes, comma-separated."),
        click.option("--dp-mode", type=click.Choice(["strict", "relaxed"]),
                     default="strict", show_default=True, envvar="DOCASD_DP_MODE"),
        click.option("--forbid-zero-step", is_flag=True, default=False,
                     envvar="DOCASD_FORBID_ZERO_STEP",
                     help="Disallow two targets sharing one source sentence."),
        click.option("--placeholder", default="", envvar="DOCASD_PLACEHOLDER",
                     help="Text standing in for omitted sentences."),
        click.option("--joiner", type=click.Choice(["space", "none", "auto"]),
                     default="auto", show_default=True, envvar="DOCASD_JOINER"),
        click.option("--sidecar-url", default=None, envvar="DOCASD_SIDECAR_URL",
                     help="Base URL of the neural scoring sidecar."),
        click.option("--batch-size", type=int, default=64, show_default=True,
                     envvar="DOCASD_BATCH_SIZE"),
        click.option("--cache-dir", default=None, envvar="DOCASD_CACHE_DIR",
                     help="Directory for the similarity-matrix cache."),
        click.option("--workers", type=int, default=1, show_default=True,
                     envvar="DOCASD_WORKERS"),
        click.option("--segmenter", type=click.Choice(["builtin-rules", "external"]),
                     default="builtin-rules", show_default=True,
                     envvar="DOCASD_SEGMENTER"),
        click.option("--segmenter-command", default=None,
                     envvar="DOCASD_SEGMENTER_COMMAND",
                     help="Command template for the external segmenter."),
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                     default=None, envvar="DOCASD_CONFIG",
                     help="JSON file with defaults for any of these options."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _parse_ks(value) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(int(k) for k in value)
    try:
        return tuple(int(part) for part in str(value).split(",") if part.strip())
    except ValueError as exc:
        raise DataError(f"cannot parse ks {value!r}: {exc}") from exc


def build_run_config(ctx: click.Context, params: dict) -> RunConfig:
    """Merge defaults, config file, environment and flags into a RunConfig."""
    file_values: dict = {}
    if params.get("config_file"):
        try:
            file_values = json.loads(Path(params["config_file"]).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read config file: {exc}") from exc
        unknown = set(file_values) - set(_CONFIG_KEYS)
        if unknown:
            raise DataError(f"unknown config file keys: {sorted(unknown)}")

    def pick(name):
        if (ctx.get_parameter_source(name) == ParameterSource.DEFAULT
                and name in file_values):
            return file_values[name]
        return params[name]

    segmenter = SegmenterConfig(backend=pick("segmenter"),
                                external_command=pick("segmenter_command"))
    return RunConfig(
        metric_align=str(pick("metric_align")),
        metric_eval=str(pick("metric_eval")),
        segmenter=segmenter,
        dp_mode=pick("dp_mode"),
        allow_zero_step=not pick("forbid_zero_step"),
        ks=_parse_ks(pick("ks")),
        joiner=pick("joiner"),
        placeholder=pick("placeholder"),
        sidecar_url=pick("sidecar_url"),
        batch_size=int(pick("batch_size")),
        cache_dir=pick("cache_dir"),
        workers=int(pick("workers")),
    )


@click.group(name="docasd")
@click.version_option(__version__)
def cli():
    """Document-level MT evaluation via alignment and sliding chunks."""


@cli.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False),
              envvar="DOCASD_CORPUS", help="JSONL corpus to evaluate.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Write the JSON run report here.")
@click.option("--tsv", "tsv_path", type=click.Path(dir_okay=False),
              help="Write the system table as TSV here.")
@click.option("--strict", is_flag=True, default=False,
              help="Fail (exit 2) when any document is skipped.")
@config_options
@click.pass_context
def evaluate(ctx, corpus, report_path, tsv_path, strict, **params):
    """Evaluate every candidate translation in a corpus and rank systems."""
    config = build_run_config(ctx, params)
    records = read_corpus(corpus)
    results, skipped = evaluate_corpus(records, config.metric_eval, config)
    documents = [document_entry(system, result) for _, system, result in results]
    report = build_report(config.echo(), documents, skipped)

    if report_path:
        write_report(report, report_path)
        click.echo(f"report written to {report_path}")
    systems = systems_from_documents(documents)
    if tsv_path:
        Path(tsv_path).write_text(render_systems_tsv(systems), encoding="utf-8")
    if systems:
        width = max(len(s.system) for s in systems) + 2
        click.echo(f"{'system':<{width}}{'score':>10}  rank")
        for s in sorted(systems, key=lambda x: (x.rank, x.system)):
            rank = int(s.rank) if float(s.rank).is_integer() else s.rank
            click.echo(f"{s.system:<{width}}{s.score:>10.6f}  {rank}")
    if skipped:
        click.echo(f"skipped {len(skipped)} document(s)", err=True)
        if strict:
            raise DataError(f"{len(skipped)} document(s) skipped in --strict mode")


@cli.command()
@click.option("--auto", "auto_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Run report or ranking file with the automatic ranking.")
@click.option("--human", "human_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Ranking file with the human ranking.")
def correlate(auto_path, human_path):
    """Agreement between an automatic ranking and a human ranking."""
    try:
        auto = report_system_scores(read_report(auto_path))
    except DataError:
        ranking = load_ranking_file(auto_path)
        scores = ranking.scores or {}
        auto = [SystemScore(system=name, score=scores.get(name, math.nan), rank=rank)
                for name, rank in sorted(ranking.ranks.items())]
    human = load_ranking_file(human_path)
    result = correlate_rankings(human, auto)
    click.echo(f"pearson_on_ranks={result.pearson_on_ranks:.3f} "
               f"kendall={result.kendall_tau:.3f}")
    if result.pearson_on_scores is not None:
        click.echo(f"pearson_on_scores={result.pearson_on_scores:.3f}")


@cli.command()
@click.option("--src", "src_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tgt", "tgt_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--src-lang", required=True)
@click.option("--tgt-lang", required=True)
@click.option("--ref", "ref_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Write the alignment as JSON here.")
@config_options
@click.pass_context
def align(ctx, src_path, tgt_path, src_lang, tgt_lang, ref_path, report_path, **params):
    """Align one translation to its source and print the reconstruction."""
    config = build_run_config(ctx, params)
    src_doc = Path(src_path).read_text(encoding="utf-8")
    tgt_doc = Path(tgt_path).read_text(encoding="utf-8")
    ref_doc = Path(ref_path).read_text(encoding="utf-8") if ref_path else None
    pair = align_document(src_doc, tgt_doc, src_lang, tgt_lang, config,
                          ref_doc=ref_doc, doc_id=Path(src_path).stem)

    path_str = " ".join(f"({s},{t})" for s, t in pair.path.pairs)
    click.echo(f"path: {path_str}")
    click.echo(f"total: {pair.path.total:.6f}")
    click.echo(f"placeholders: {pair.placeholder_count}")
    for i, entry in enumerate(pair.tgt_reconstructed):
        marker = " (placeholder)" if entry.is_placeholder else ""
        click.echo(f"[{i}] src: {pair.src.sentences[i]}")
        click.echo(f"    mt:  {entry.text}{marker}")

    if report_path:
        payload = {
            "doc_id": pair.src.doc_id,
            "path": [list(p) for p in pair.path.pairs],
            "total": pair.path.total,
            "placeholder_count": pair.placeholder_count,
            "reconstructed": [
                {"text": e.text, "target_indices": list(e.target_indices),
                 "is_placeholder": e.is_placeholder}
                for e in pair.tgt_reconstructed
            ],
        }
        Path(report_path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                                     encoding="utf-8")


@cli.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--systems", required=True,
              help="The two candidate systems to compare, e.g. 'modelA,modelB'.")
@click.option("--margin", type=float, default=0.0, show_default=True,
              help="Minimum score gap for a pair to be emitted.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@config_options
@click.pass_context
def prefpairs(ctx, corpus, systems, margin, out_path, **params):
    """Generate preference triplets from a two-candidate corpus."""
    config = build_run_config(ctx, params)
    names = [s.strip() for s in systems.split(",") if s.strip()]
    if len(names) != 2:
        raise click.UsageError("--systems needs exactly two comma-separated names")
    records = read_corpus(corpus)
    triplets = []
    filtered = 0
    skipped = 0
    for record in records:
        try:
            triplet = build_preference_pairs(record, names[0], names[1],
                                             config.metric_eval, margin, config)
        except RecordSkipped:
            skipped += 1
            continue
        if triplet is None:
            filtered += 1
        else:
            triplets.append(triplet)
    write_preference_file(triplets, out_path)
    click.echo(f"emitted {len(triplets)} triplet(s) to {out_path} "
               f"(filtered {filtered}, skipped {skipped})")


@cli.command()
@click.option("--src", "src_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--hyp", "hyp_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Hypothesis file; repeat for several hypotheses.")
@click.option("--src-lang", default="en", show_default=True)
@click.option("--tgt-lang", default="en", show_default=True)
@click.option("--failure-reward", type=float, default=0.0, show_default=True)
@click.option("--server-url", default=None, envvar="DOCASD_SERVER_URL",
              help="POST to a running evaluation service instead of "
                   "computing locally.")
@config_options
@click.pass_context
def reward(ctx, src_path, hyp_paths, src_lang, tgt_lang, failure_reward,
           server_url, **params):
    """Scalar reward per hypothesis document, one per line."""
    src_doc = Path(src_path).read_text(encoding="utf-8")
    hyps = [Path(p).read_text(encoding="utf-8") for p in hyp_paths]
    if server_url:
        rewards = _remote_rewards(server_url, src_doc, hyps, src_lang, tgt_lang,
                                  failure_reward)
    else:
        config = build_run_config(ctx, params)
        rewards = reward_batch(src_doc, hyps, config.metric_eval, config,
                               src_lang=src_lang, tgt_lang=tgt_lang,
                               failure_reward=failure_reward)
    for value in rewards:
        click.echo(f"{value:.6f}")


def _remote_rewards(server_url, src_doc, hyps, src_lang, tgt_lang, failure_reward):
    import httpx

    payload = {"src": src_doc, "hypotheses": hyps, "src_lang": src_lang,
               "tgt_lang": tgt_lang, "failure_reward": failure_reward}
    try:
        response = httpx.post(f"{server_url.rstrip('/')}/v1/reward", json=payload,
                              timeout=600.0)
    except httpx.HTTPError as exc:
        raise ScorerUnavailable(f"evaluation service unreachable: {exc}") from exc
    if response.status_code >= 500:
        raise ScorerUnavailable(
            f"evaluation service returned {response.status_code}: {response.text[:200]}")
    if response.status_code >= 400:
        raise DataError(
            f"evaluation service rejected the request ({response.status_code}): "
            f"{response.text[:500]}")
    return response.json()["rewards"]


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True, envvar="DOCASD_HOST")
@click.option("--port", type=int, default=8000, show_default=True, envvar="DOCASD_PORT")
@config_options
@click.pass_context
def serve(ctx, host, port, **params):
    """Run the evaluation HTTP service."""
    import uvicorn

    from .service import create_app

    config = build_run_config(ctx, params)
    uvicorn.run(create_app(config), host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="DOCASD")
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except ScorerUnavailable as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except DocasdError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""``founder-success`` command line.

Every subcommand takes ``--config run.yaml`` and a few overrides; outputs go
to the run directory (see :mod:`founder_success.pipeline`). Exit codes: 0 ok,
1 pipeline failure, 2 usage or configuration error.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from . import pipeline, synthetic
from .ingest import IngestError
from .llm_gateway import LlmError
from .ml import SplitError
from .segmentation import default_level_base


def _config(ctx: click.Context, **overrides) -> pipeline.RunConfig:
    path = ctx.obj.get("config")
    merged = {**ctx.obj.get("overrides", {}), **overrides}
    try:
        if path:
            cfg = pipeline.RunConfig.from_file(path, **merged)
        else:
            cfg = pipeline.RunConfig(**{k: v for k, v in merged.items() if v is not None})
        cfg.validate()
    except (ValueError, TypeError) as exc:
        raise click.UsageError(f"invalid configuration: {exc}") from exc
    return cfg


def _fail(msg: str, code: int = 1):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


@click.group()
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), help="YAML run configuration.")
@click.option("--run-dir", type=click.Path(file_okay=False), help="Override the run directory.")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug logging.")
@click.pass_context
def main(ctx: click.Context, config, run_dir, verbose):
    """Label founders with an LLM chain and predict startup success."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    ctx.ensure_object(dict)
    ctx.obj["config"] = config
    ctx.obj["overrides"] = {"run_dir": run_dir}


@main.command()
@click.option("--successful", type=click.Path(dir_okay=False), help="CSV of successful founders.")
@click.option("--unsuccessful", type=click.Path(dir_okay=False), help="CSV of unsuccessful founders.")
@click.option("--n", "n_per_class", type=int, help="Founders sampled per class.")
@click.option("--seed", "sample_seed", type=int, help="Sampling seed.")
@click.pass_context
def ingest(ctx, successful, unsuccessful, n_per_class, sample_seed):
    """Load both founder tables, drop unusable rows, draw a stratified sample."""
    if n_per_class is not None and n_per_class < 1:
        raise click.BadParameter("must be at least 1", param_hint="--n")
    cfg = _config(
        ctx, successful=successful, unsuccessful=unsuccessful, n_per_class=n_per_class, sample_seed=sample_seed
    )
    try:
        sample = pipeline.run_ingest(cfg)
    except FileNotFoundError as exc:
        _fail(str(exc))
    except IngestError as exc:
        _fail(str(exc))
    click.echo(f"sampled {len(sample)} founders -> {cfg.artifacts / 'sample.jsonl'}")


@main.command()
@click.option("--backend", "llm_backend", type=click.Choice(["mock", "live"]), help="LLM backend.")
@click.option("--fixtures", "mock_fixtures", multiple=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--concurrency", type=int, help="Maximum LLM requests in flight.")
@click.option("--max-failure-fraction", type=float, help="Tolerated share of founders with a failed stage.")
@click.pass_context
def segment(ctx, llm_backend, mock_fixtures, concurrency, max_failure_fraction):
    """Run the summary/level/persona/flag chain and build the feature matrix."""
    cfg = _config(
        ctx,
        llm_backend=llm_backend,
        mock_fixtures=list(mock_fixtures) or None,
        concurrency=concurrency,
        max_failure_fraction=max_failure_fraction,
    )
    if not (cfg.artifacts / "sample.jsonl").exists():
        _fail(f"no sample at {cfg.artifacts / 'sample.jsonl'}; run 'ingest' first")
    try:
        outcome = pipeline.run_segment(cfg)
    except LlmError as exc:
        _fail(f"LLM configuration: {exc}", 2)
    n = len(outcome.results)
    click.echo(
        f"segmented {n} founders, {outcome.failures} with failed stages, {len(outcome.matrix)} in matrix, "
        f"{outcome.backend_calls} uncached LLM calls"
    )
    if not outcome.within_tolerance(cfg.max_failure_fraction):
        _fail(f"{outcome.failures}/{n} founders failed, above tolerance {cfg.max_failure_fraction}")


@main.command("propose-taxonomy")
@click.option("--kind", type=click.Choice(["level", "persona"]), default="level", show_default=True)
@click.option("--count", "target_count", type=int, default=10, show_default=True)
@click.option("--base", "base_file", type=click.Path(exists=True, dir_okay=False), help="Seed taxonomy text.")
@click.option("--summaries", "n_summaries", type=int, default=50, show_default=True)
@click.option("--fixtures", "mock_fixtures", multiple=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def propose_taxonomy(ctx, kind, target_count, base_file, n_summaries, mock_fixtures):
    """Ask the LLM for an expanded level or persona taxonomy (for human review)."""
    cfg = _config(ctx, mock_fixtures=list(mock_fixtures) or None)
    if base_file:
        base = Path(base_file).read_text(encoding="utf-8")
    elif kind == "level":
        base = default_level_base()
    else:
        raise click.UsageError("--base is required for persona proposals")
    try:
        out = pipeline.run_propose_taxonomy(cfg, kind, target_count, base, n_summaries)
    except FileNotFoundError as exc:
        _fail(f"{exc}; run 'segment' first")
    except (LlmError, ValueError) as exc:
        _fail(str(exc))
    click.echo(f"proposal written to {out}")


@main.command()
@click.option("--min-gap", "min_gap_pp", type=float, help="Flag table: minimum yes/no gap in points.")
@click.pass_context
def analyze(ctx, min_gap_pp):
    """Success-rate tables by level, persona and flag."""
    cfg = _config(ctx, min_gap_pp=min_gap_pp)
    try:
        paths = pipeline.run_analyze(cfg)
    except FileNotFoundError as exc:
        _fail(f"{exc}; run 'segment' first")
    for p in paths:
        click.echo(str(p))


@main.command("train-eval")
@click.option("--split-seed", type=int)
@click.option("--model-seed", type=int)
@click.option("--threshold", type=float, help="Decision threshold on the success score.")
@click.pass_context
def train_eval(ctx, split_seed, model_seed, threshold):
    """Fit the three classifiers and score them on both test sets."""
    cfg = _config(ctx, split_seed=split_seed, model_seed=model_seed, threshold=threshold)
    try:
        pipeline.run_train_eval(cfg)
    except FileNotFoundError as exc:
        _fail(f"{exc}; run 'segment' first")
    except SplitError as exc:
        _fail(str(exc))
    click.echo((cfg.reports / "model_metrics.txt").read_text(encoding="utf-8"), nl=False)


@main.command()
@click.pass_context
def report(ctx):
    """Bundle all tables into reports/report.md."""
    cfg = _config(ctx)
    click.echo(str(pipeline.run_report(cfg)))


@main.command()
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--successful", "n_successful", type=int, default=200, show_default=True)
@click.option("--unsuccessful", "n_unsuccessful", type=int, default=240, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--messy-rate", type=float, default=0.03, show_default=True)
def synth(out_dir, n_successful, n_unsuccessful, seed, messy_rate):
    """Write a synthetic founder pool, mock LLM fixtures and a run config."""
    pool = synthetic.generate(out_dir, n_successful, n_unsuccessful, seed, messy_rate)
    cfg_path = Path(out_dir) / "run.yaml"
    cfg_path.write_text(
        "successful: successful.csv\n"
        "unsuccessful: unsuccessful.csv\n"
        "run_dir: run\n"
        "n_per_class: 150\n"
        f"sample_seed: {seed}\n"
        "split_seed: 0\n"
        "model_seed: 0\n"
        "llm_backend: mock\n"
        "mock_fixtures: [mock_completions.jsonl]\n",
        encoding="utf-8",
    )
    click.echo(f"{pool.n_valid} valid founders, fixtures {pool.fixtures}, config {cfg_path}")


if __name__ == "__main__":
    main()

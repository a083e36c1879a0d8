"""Command-line entry points: mine, feed, create-dataset, dedup, stats, sample."""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import pipeline, stats
from .analyzers import Tool, load_rule_universe
from .dataset import read_dataset, write_dataset
from .dedup import dedup_dataset
from .pipeline import COMMIT_FILTERS, RunConfig

_ANALYZER_NAMES = {"pmd": Tool.PMD, "spotbugs": Tool.SPOTBUGS, "builtin": Tool.BUILTIN}

Z_SCORES = {0.90: 1.645, 0.95: 1.96, 0.99: 2.576}


def _parse_date(_ctx, _param, value: str | None) -> datetime | None:
    if value is None:
        return None
    try:
        return datetime.strptime(value, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    except ValueError:
        raise click.BadParameter(f"expected YYYY-MM-DD, got {value!r}")


def _common_mine_options(f):
    for option in reversed(
        [
            click.option("--since", callback=_parse_date, default=None,
                         help="Only commits on/after this date (YYYY-MM-DD, UTC)."),
            click.option("--until", callback=_parse_date, default=None,
                         help="Only commits on/before this date (YYYY-MM-DD, UTC)."),
            click.option("--analyzers", default="builtin", show_default=True,
                         help="Comma-separated subset of pmd,spotbugs,builtin."),
            click.option("--workdir", type=click.Path(path_type=Path), default=Path("work"),
                         show_default=True),
            click.option("--workers", type=int, default=1, show_default=True),
            click.option("--seed", type=int, default=0, show_default=True),
            click.option("--commit-filter", "commit_filter", default="none",
                         type=click.Choice(sorted(COMMIT_FILTERS)), show_default=True,
                         help="Commit ranking plug-in; only the pass-through ships."),
        ]
    ):
        f = option(f)
    return f


def _build_config(repos, since, until, analyzers, workdir, workers, seed, commit_filter):
    try:
        tools = tuple(_ANALYZER_NAMES[name.strip()] for name in analyzers.split(",") if name.strip())
    except KeyError as e:
        raise click.BadParameter(f"unknown analyzer {e.args[0]!r}")
    try:
        return RunConfig(
            repos=list(repos),
            workdir=workdir,
            since=since,
            until=until,
            analyzers=tools,
            workers=workers,
            seed=seed,
            commit_filter=commit_filter,
        )
    except ValueError as e:
        raise click.BadParameter(str(e))


def _report_results(results) -> None:
    failed = [r for r in results if not r.ok]
    for r in results:
        if r.ok:
            emitted = sum(1 for d in r.dispositions if d.status == "emitted")
            skipped = sum(1 for d in r.dispositions if d.status == "skipped")
            errors = sum(1 for d in r.dispositions if d.status == "error")
            click.echo(
                f"{r.slug}: {len(r.dispositions)} pairs "
                f"({emitted} emitted, {skipped} skipped, {errors} errors), "
                f"{r.analyzed_commits} commits analyzed"
            )
        else:
            click.echo(f"{r.slug}: FAILED: {r.fatal_error}", err=True)
    if failed:
        sys.exit(1)


@click.group()
def main():
    """Mine actionable/non-actionable SCA warnings from Git history."""


@main.command()
@click.argument("repo_url")
@_common_mine_options
def mine(repo_url, **kwargs):
    """Mine a single repository into per-pair JSONL outputs."""
    config = _build_config([repo_url], **kwargs)
    _report_results(pipeline.mine_repos(config))


@main.command()
@click.argument("list_file", type=click.Path(exists=True, path_type=Path))
@_common_mine_options
def feed(list_file, **kwargs):
    """Mine every repository listed in LIST_FILE (one URL per line, # comments)."""
    repos = pipeline.read_repo_list(list_file)
    if not repos:
        click.echo("repository list is empty; nothing to do")
        return
    config = _build_config(repos, **kwargs)
    _report_results(pipeline.mine_repos(config))


@main.command("create-dataset")
@click.option("--workdir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Dataset file; .parquet for columnar, .jsonl for JSON lines.")
@click.option("--archive", "archive_root", type=click.Path(path_type=Path), default=None,
              help="Source archive directory [default: alongside --out].")
def create_dataset(workdir, out, archive_root):
    """Assemble mined outputs into the final dataset plus the source archive."""
    archive_root = archive_root or out.parent / "archive"
    build = pipeline.create_dataset(workdir, out, archive_root)
    if build.violations:
        for idx, issues in build.violations:
            for issue in issues:
                click.echo(f"record {idx}: {issue}", err=True)
        click.echo(f"{len(build.violations)} invalid records; dataset not written", err=True)
        sys.exit(1)
    click.echo(
        f"{len(build.records)} records "
        f"({build.actionable} actionable, {build.non_actionable} non-actionable) -> {out}"
    )


@main.command()
@click.argument("dataset", type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--archive", "archive_root", type=click.Path(exists=True, path_type=Path),
              required=True, help="Source archive produced by create-dataset.")
def dedup(dataset, out, archive_root):
    """Drop near-duplicate records (MinHash/LSH over warning contexts)."""
    records = read_dataset(dataset)
    result = dedup_dataset(records, archive_root)
    write_dataset(result.kept, out)
    drop_log = out.with_suffix(out.suffix + ".droplog.jsonl")
    with open(drop_log, "w", encoding="utf-8") as f:
        for entry in result.drops:
            f.write(entry.to_json() + "\n")
    if result.flagged:
        click.echo(f"{len(result.flagged)} records kept with missing source files", err=True)
    click.echo(
        f"kept {len(result.kept)} of {len(records)} records "
        f"({result.dropped_count} dropped) -> {out}"
    )


@main.command("stats")
@click.argument("dataset", type=click.Path(exists=True, path_type=Path))
@click.option("--kind", type=click.Choice(["category", "rules", "projects"]), required=True)
@click.option("--tool", "tool_name", type=click.Choice(["pmd", "spotbugs", "builtin"]),
              default="pmd", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "svg"]),
              default="table", show_default=True)
def stats_cmd(dataset, kind, tool_name, fmt):
    """Summary tables: category distribution, rule coverage, per-project counts."""
    records = read_dataset(dataset)
    tool = _ANALYZER_NAMES[tool_name]
    if kind == "category":
        rows = stats.category_distribution(records, tool)
        svg_keys = ["actionable", "non_actionable"]
        label_key = "category"
    elif kind == "rules":
        counts, unknown = stats.rule_coverage_classes(records, load_rule_universe(tool))
        rows = [{"class": c.value, "count": n} for c, n in counts.items()]
        if unknown:
            click.echo(f"unknown rules in dataset: {sorted(unknown)}", err=True)
        svg_keys = ["count"]
        label_key = "class"
    else:
        rows = stats.project_stats(records)
        svg_keys = [k for k in rows[0] if k != "repo"] if rows else []
        label_key = "repo"
    if fmt == "csv":
        click.echo(stats.rows_to_csv(rows), nl=False)
    elif fmt == "svg":
        click.echo(stats.bar_chart_svg(rows, label_key, svg_keys))
    else:
        for row in rows:
            click.echo("  ".join(f"{k}={v}" for k, v in row.items()))


@main.command()
@click.argument("dataset", type=click.Path(exists=True, path_type=Path))
@click.option("--confidence", type=float, default=0.90, show_default=True)
@click.option("--margin", type=float, default=0.10, show_default=True)
@click.option("--z", "z_override", type=float, default=None,
              help="Explicit z-score, overriding --confidence.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the sample as JSONL instead of stdout.")
def sample(dataset, confidence, margin, z_override, seed, out):
    """Draw the statistically sized manual-validation sample."""
    records = read_dataset(dataset)
    z = z_override if z_override is not None else Z_SCORES.get(confidence)
    if z is None:
        raise click.BadParameter(
            f"no z-score known for confidence {confidence}; pass --z explicitly"
        )
    spec = stats.SampleSpec(N=len(records), z=z, epsilon=margin)
    n = stats.cochran_sample_size(spec)
    click.echo(f"population={len(records)} z={z} margin={margin} -> sample size {n}")
    if abs(z - 1.645) < 1e-9:
        alt = stats.cochran_sample_size(stats.SampleSpec(N=len(records), z=1.65, epsilon=margin))
        click.echo(f"reference: z=1.65 gives sample size {alt}")
    drawn = stats.draw_validation_sample(records, n, seed)
    lines = "\n".join(json.dumps(r) for r in drawn)
    if out:
        Path(out).write_text(lines + "\n", encoding="utf-8")
        click.echo(f"wrote {n} sampled records -> {out}")
    else:
        click.echo(lines)


if __name__ == "__main__":
    main()

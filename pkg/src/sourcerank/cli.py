"""Batch driver: rank CSV rounds, shortlist criteria, serve the API.

Exit codes: 0 success, 2 validation error, 3 degenerate input,
4 environment failure.
"""

from __future__ import annotations

import itertools
import sys
from pathlib import Path

import click

from . import __version__
from .discrepancy import (
    FuzzyBands,
    build_report,
    classify_relevance,
    mean_pairwise_distance,
    pairwise_agreement,
)
from .engine import (
    EngineError,
    EmptyShortlistError,
    MissingValuesError,
    UnimputableError,
    ZeroColumnError,
    ZeroSheetError,
    compute_ranking,
    dense_ranks,
    shortlist_criteria,
)
from .io_formats import (
    ImportError_,
    export_result,
    import_round,
    read_votes_csv,
    restrict_matrices,
    restrict_sheets,
    result_from_dict,
)
from .model import MethodConfig, SCHEMA_VERSION

EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_ENVIRONMENT = 4

_DEGENERATE_ERRORS = (
    ZeroColumnError,
    ZeroSheetError,
    UnimputableError,
    EmptyShortlistError,
    MissingValuesError,
)


def _parse_threshold(text: str) -> tuple[str, int]:
    if text == "strict":
        return "strict-majority", 1
    if text == "all":
        return "accept-all", 1
    if text.startswith("atleast:"):
        try:
            t = int(text.split(":", 1)[1])
        except ValueError:
            raise click.BadParameter(f"bad at-least threshold {text!r}")
        if t < 1:
            raise click.BadParameter("at-least threshold must be >= 1")
        return "at-least", t
    raise click.BadParameter(f"threshold must be strict, all, or atleast:<t>, got {text!r}")


@click.group()
@click.version_option(version=f"{__version__} (schema {SCHEMA_VERSION})", prog_name="sourcerank")
def main():
    """Collaborative ranking of requirements/data sources."""


@main.command()
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--normalization", type=click.Choice(["sum", "max"]), default="sum", show_default=True)
@click.option("--threshold", default="all", show_default=True, help="strict | all | atleast:<t>")
@click.option("--scale/--no-scale", "scale_final", default=True, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def rank(in_dir, normalization, threshold, scale_final, out_dir):
    """Run the full method on a directory of round CSV files."""
    policy, at_least_t = _parse_threshold(threshold)
    try:
        inputs = import_round(in_dir)
    except ImportError_ as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    config = MethodConfig(
        normalization=normalization,
        vote_threshold_policy=policy,
        at_least_t=at_least_t,
        scale_final=scale_final,
    )
    try:
        if inputs.ballots and policy != "accept-all":
            kept = shortlist_criteria(inputs.ballots, policy, len(inputs.ballots), at_least_t)
        else:
            kept = set(inputs.criterion_ids)
        sheets = restrict_sheets(inputs.sheets, kept)
        matrices = restrict_matrices(inputs.matrices, kept)
        result = compute_ranking(
            sheets,
            matrices,
            config,
            source_ids=inputs.source_ids,
            criterion_ids=[c for c in inputs.criterion_ids if c in kept],
        )
    except _DEGENERATE_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DEGENERATE)
    except EngineError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    report = build_report(result)
    export_result(result, report, out_dir)

    bands = FuzzyBands()
    click.echo(f"{'rank':>4}  {'source':<28} {'score':>8} {'scaled':>8} {'band':<8} "
               f"{'spread':>8} {'band':<10}")
    for rank_no, group in dense_ranks(result.group_scaled):
        for d in group:
            spread, spread_band = report.per_source_spread[d]
            band = classify_relevance(min(result.group_scaled[d], 1.0), bands)
            click.echo(
                f"{rank_no:>4}  {d:<28} {result.group[d]:>8.4f} "
                f"{result.group_scaled[d]:>8.4f} {band:<8} {spread:>8.4f} {spread_band:<10}"
            )
    if result.degenerate:
        click.echo("note: all-zero panel, final scaling skipped", err=True)


@main.command()
@click.option("--in", "votes_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold", default="strict", show_default=True, help="strict | all | atleast:<t>")
def shortlist(votes_file, threshold):
    """Apply the vote threshold to a votes CSV and print kept/dropped criteria."""
    policy, at_least_t = _parse_threshold(threshold)
    try:
        ballots, criteria = read_votes_csv(Path(votes_file))
    except ImportError_ as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if not ballots:
        click.echo("error: no ballots in file", err=True)
        sys.exit(EXIT_VALIDATION)
    k = len(ballots)
    try:
        kept = shortlist_criteria(ballots, policy, k, at_least_t)
    except EmptyShortlistError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DEGENERATE)
    click.echo(f"{'criterion':<28} {'votes':>5}  decision")
    for c in criteria:
        votes = sum(b.votes[c] for b in ballots)
        decision = "kept" if c in kept else "dropped"
        click.echo(f"{c:<28} {votes:>5}  {decision}")


@main.command()
@click.option("--listen", default="127.0.0.1:8765", show_default=True, help="host:port")
@click.option("--data-dir", required=True, type=click.Path(file_okay=False),
              envvar="SOURCERANK_DATA_DIR")
@click.option("--static-dir", default=None, type=click.Path(file_okay=False),
              help="serve a built webapp from this directory")
def serve(listen, data_dir, static_dir):
    """Start the workshop HTTP service."""
    import uvicorn

    from .service import create_app

    host, _, port_text = listen.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        click.echo(f"error: bad listen address {listen!r}", err=True)
        sys.exit(EXIT_ENVIRONMENT)
    Path(data_dir).mkdir(parents=True, exist_ok=True)
    app = create_app(data_dir, static_dir=static_dir)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        if isinstance(exc, SystemExit) and not exc.code:
            return
        click.echo(f"error: cannot serve on {listen}: {exc}", err=True)
        sys.exit(EXIT_ENVIRONMENT)


@main.command("compare-rounds")
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False),
              envvar="SOURCERANK_DATA_DIR")
@click.option("--session", "session_id", required=True)
def compare_rounds(data_dir, session_id):
    """Print per-round convergence and per-pair analyst distances."""
    from .store import SessionStore, UnknownSessionError

    store = SessionStore(data_dir)
    try:
        session, _ = store.load(session_id)
    except UnknownSessionError:
        click.echo(f"error: unknown session {session_id!r}", err=True)
        sys.exit(EXIT_VALIDATION)

    computed = [(r.index, result_from_dict(r.result)) for r in session.rounds if r.result]
    if not computed:
        click.echo("error: session has no computed rounds", err=True)
        sys.exit(EXIT_VALIDATION)

    click.echo(f"{'round':>5}  {'mean pairwise distance':>24}")
    for index, result in computed:
        click.echo(f"{index:>5}  {mean_pairwise_distance(result):>24.4f}")

    if any(len(result.analyst_ids()) >= 2 for _, result in computed):
        click.echo()
        click.echo(f"{'pair':<24}" + "".join(f" round {i:>2}" for i, _ in computed))
        pairs = sorted(
            {p for _, result in computed
             for p in itertools.combinations(sorted(result.analyst_ids()), 2)}
        )
        for a, b in pairs:
            cells = []
            for _, result in computed:
                dist = pairwise_agreement(result) if len(result.analyst_ids()) >= 2 else {}
                cells.append(f" {dist.get((a, b), float('nan')):>8.4f}")
            click.echo(f"{a + ' - ' + b:<24}" + "".join(cells))


if __name__ == "__main__":
    main()

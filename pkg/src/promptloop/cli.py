"""Command-line driver for batch and simulated runs.

Thin client over the same session service the HTTP API wraps, so both
surfaces always agree. Data directory resolution: --data-dir flag, then the
APE_DATA_DIR environment variable, then the working directory.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import data_dir, load_config_file, session_config_from_dict
from .data import load_pairs_jsonl
from .errors import PromptLoopError
from .service import SessionService
from .session import AnnotationSubmission, SessionState, prompt_preview

_data_dir_option = click.option(
    "--data-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Session storage directory (default: $APE_DATA_DIR or cwd).",
)


def _service(directory: Path | None) -> SessionService:
    return SessionService(data_dir(directory))


def _fail(exc: PromptLoopError) -> "click.ClickException":
    error = click.ClickException(f"[{exc.code}] {exc.message}")
    error.exit_code = 1
    return error


def _print_pending(state: SessionState, batch: list[str]) -> None:
    scores = {s.pair_id: s for s in state.scores_for_iteration(state.iteration + 1)}
    click.echo(f"iteration {state.iteration + 1}: {len(batch)} pair(s) awaiting annotation")
    for pair_id in batch:
        pair = state.pool.get(pair_id)
        click.echo(f"\n--- {pair_id} ---")
        for side, record in (("A", pair.left), ("B", pair.right)):
            for line in record.lines():
                click.echo(f"  {side}| {line}")
        score = scores.get(pair_id)
        if score is not None:
            click.echo(
                f"  committee votes={list(score.votes)} "
                f"positive_ratio={float(score.positive_ratio):.3f} entropy={score.entropy:.3f}"
            )


@click.group()
def main() -> None:
    """Active prompt refinement: sample, annotate, update, evaluate."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--pool", "pool_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--eval", "eval_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--session-id", default=None, help="Defaults to the config file stem.")
@click.option("--strategy", type=click.Choice(["random", "self_consistency"]), default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--committee-size", type=int, default=None)
@click.option("--mode", type=click.Choice(["incremental", "fixed"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--candidate-cap", type=int, default=None)
@click.option("--max-iterations", type=int, default=None)
@click.option("--require-explanation/--no-require-explanation", "require_explanation",
              default=None, help="Override the per-strategy explanation default.")
@_data_dir_option
def init(config_path, pool_path, eval_path, session_id, strategy, batch_size,
         committee_size, mode, seed, candidate_cap, max_iterations,
         require_explanation, data_dir):
    """Create a session from a config file plus pool and eval files."""
    try:
        _, raw = load_config_file(config_path)
        overrides = {"strategy": strategy, "batch_size": batch_size,
                     "committee_size": committee_size, "mode": mode, "seed": seed,
                     "candidate_cap": candidate_cap, "max_iterations": max_iterations,
                     "require_explanation": require_explanation}
        for key, value in overrides.items():
            if value is not None:
                raw[key] = value
        pool_file = pool_path or raw.get("pool_path")
        eval_file = eval_path or raw.get("eval_path")
        if pool_file is None or eval_file is None:
            raise click.ClickException("pool and eval files must be given via flags or config")
        raw.pop("pool_path", None)
        raw.pop("eval_path", None)
        config = session_config_from_dict(raw, base_dir=config_path.parent)
        pool_file, eval_file = Path(pool_file), Path(eval_file)
        if not pool_file.is_absolute():
            pool_file = config_path.parent / pool_file
        if not eval_file.is_absolute():
            eval_file = config_path.parent / eval_file
        pool = load_pairs_jsonl(pool_file)
        eval_set = load_pairs_jsonl(eval_file, require_gold=True)
        sid = session_id or config_path.stem
        state = _service(data_dir).create_session(sid, config, pool, eval_set)
    except PromptLoopError as exc:
        raise _fail(exc)
    click.echo(f"created session {state.session_id!r} "
               f"(pool={len(state.pool)}, eval={len(state.eval_set)})")


@main.command()
@click.option("--session", "session_id", required=True)
@_data_dir_option
def iterate(session_id, data_dir):
    """Sample the next batch of ambiguous pairs for annotation."""
    try:
        state, batch = _service(data_dir).iterate(session_id)
    except PromptLoopError as exc:
        raise _fail(exc)
    _print_pending(state, batch)


def _read_submissions(path: Path) -> list[AnnotationSubmission]:
    submissions = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"bad JSON on line {lineno} of {path}: {exc}")
        submissions.append(
            AnnotationSubmission(
                pair_id=str(raw["pair_id"]),
                label=int(raw["label"]),
                explanation=raw.get("explanation"),
            )
        )
    return submissions


@main.command()
@click.option("--session", "session_id", required=True)
@click.option("--file", "labels_file", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="JSONL of {pair_id, label, explanation?}; omit for interactive entry.")
@_data_dir_option
def annotate(session_id, labels_file, data_dir):
    """Submit labels for the pending batch (all-or-nothing)."""
    service = _service(data_dir)
    try:
        if labels_file is not None:
            submissions = _read_submissions(labels_file)
        else:
            state = service.get_session(session_id)
            if not state.pending_batch:
                raise click.ClickException("no batch awaiting annotation")
            need_explanation = state.config.explanations_required
            submissions = []
            for pair_id in state.pending_batch:
                pair = state.pool.get(pair_id)
                click.echo(f"\n--- {pair_id} ---")
                for side, record in (("A", pair.left), ("B", pair.right)):
                    for line in record.lines():
                        click.echo(f"  {side}| {line}")
                label = click.prompt("label (1=match, 0=non-match)", type=click.IntRange(0, 1))
                explanation = None
                if need_explanation:
                    explanation = click.prompt("explanation", type=str)
                submissions.append(AnnotationSubmission(pair_id, label, explanation))
        state = service.annotate(session_id, submissions)
    except PromptLoopError as exc:
        raise _fail(exc)
    click.echo(
        f"recorded {len(submissions)} annotation(s); iteration={state.iteration}, "
        f"demonstrations={len(state.demonstrations)}, phase={state.phase}"
    )


@main.command()
@click.option("--session", "session_id", required=True)
@_data_dir_option
def evaluate(session_id, data_dir):
    """Evaluate the current prompt on the held-out set (temperature 0)."""
    try:
        _, report = _service(data_dir).evaluate(session_id)
    except PromptLoopError as exc:
        raise _fail(exc)
    click.echo(
        f"iteration {report.iteration}: accuracy={report.accuracy:.4f} "
        f"precision={report.precision:.4f} recall={report.recall:.4f} f1={report.f1:.4f} "
        f"(unparseable={report.unparseable_count}/{report.total})"
    )


@main.command()
@click.option("--session", "session_id", required=True)
@click.option("--simulate-annotator", is_flag=True, default=False,
              help="Answer pending batches from gold labels.")
@click.option("--iterations", type=int, default=1, show_default=True)
@_data_dir_option
def run(session_id, simulate_annotator, iterations, data_dir):
    """Run whole sampling/annotation/evaluation iterations unattended."""
    try:
        state = _service(data_dir).run_loop(
            session_id, iterations, simulate_annotator=simulate_annotator
        )
    except PromptLoopError as exc:
        raise _fail(exc)
    click.echo(
        f"session {state.session_id!r}: iteration={state.iteration}, "
        f"demonstrations={len(state.demonstrations)}, stop={state.stop_reason}"
    )
    if state.evaluation_history:
        last = state.evaluation_history[-1]
        click.echo(f"latest f1={last.f1:.4f} accuracy={last.accuracy:.4f}")


@main.command()
@click.option("--session", "session_id", required=True)
@_data_dir_option
def report(session_id, data_dir):
    """Print the metric history as a table."""
    try:
        state = _service(data_dir).get_session(session_id)
    except PromptLoopError as exc:
        raise _fail(exc)
    if not state.evaluation_history:
        click.echo("no evaluations recorded yet")
        return
    header = f"{'iter':>4}  {'accuracy':>8}  {'precision':>9}  {'recall':>6}  {'f1':>6}  {'unparse':>7}"
    click.echo(header)
    click.echo("-" * len(header))
    for entry in state.evaluation_history:
        click.echo(
            f"{entry.iteration:>4}  {entry.accuracy:>8.4f}  {entry.precision:>9.4f}  "
            f"{entry.recall:>6.4f}  {entry.f1:>6.4f}  {entry.unparseable_count:>7}"
        )


@main.command(name="export-prompt")
@click.option("--session", "session_id", required=True)
@_data_dir_option
def export_prompt(session_id, data_dir):
    """Emit the current prompt rendered around a placeholder input."""
    try:
        state = _service(data_dir).get_session(session_id)
    except PromptLoopError as exc:
        raise _fail(exc)
    click.echo(prompt_preview(state))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              default=None, help="Static directory with the built annotation UI.")
@_data_dir_option
def serve(host, port, ui_dir, data_dir):
    """Start the HTTP session API (and optionally the annotation UI)."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(data_dir, static_dir=ui_dir), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())

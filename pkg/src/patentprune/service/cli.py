"""`pp` command line: step a run through the pipeline from a terminal.

Typical session:

    pp ingest --patents patents.jsonl --eval-date 2026-01-15 --run-id demo \
        --aliases aliases.csv --gni gni.csv --market market.json \
        --needs-corpus needs.jsonl --model model.json
    pp categorize --run-id demo
    pp rank --run-id demo --profile QuickMonetization --select-categories G11C|GT15|High
    pp review PostRanking --run-id demo --approve
    pp review PostMatch --run-id demo --approve
    pp review FinalOntology --run-id demo --approve
"""

from __future__ import annotations

import json
import sys
from datetime import date
from pathlib import Path

import click

from ..gates import Decision
from ..jsonio import read_json
from ..ltr.training import TrainHyper
from .pipeline import RunInputs, Service


@click.group()
@click.option("--runs-dir", default="runs", show_default=True, help="Run store directory.")
@click.pass_context
def main(ctx: click.Context, runs_dir: str) -> None:
    """Patent-portfolio pruning pipeline."""
    ctx.obj = Service(runs_dir)


def _echo_run(run: dict) -> None:
    click.echo(f"run {run['run_id']}: phase {run['phase']}")


@main.command()
@click.option("--patents", required=True, type=click.Path(exists=True))
@click.option("--eval-date", required=True, help="Evaluation date (ISO-8601).")
@click.option("--run-id", default="", help="Run id (derived from inputs when omitted).")
@click.option("--aliases", type=click.Path(exists=True))
@click.option("--gni", type=click.Path(exists=True))
@click.option("--market", type=click.Path(exists=True))
@click.option("--needs-corpus", type=click.Path(exists=True))
@click.option("--patterns", type=click.Path(exists=True))
@click.option("--broad-terms", type=click.Path(exists=True))
@click.option("--params-config", type=click.Path(exists=True))
@click.option("--profiles-config", type=click.Path(exists=True))
@click.option("--model", type=click.Path(exists=True))
@click.option("--profile", default="QuickMonetization", show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.pass_obj
def ingest(service: Service, patents: str, eval_date: str, run_id: str, **paths) -> None:
    """Create a run: ingest, legal-filter, and normalize the portfolio."""
    inputs = RunInputs(
        patents=patents,
        evaluation_date=date.fromisoformat(eval_date),
        run_id=run_id,
        **paths,
    )
    run = service.create_run(inputs)
    data = read_json(service.run_dir(run["run_id"]) / "portfolio.json")
    kept = len(data["portfolio"]["records"])
    click.echo(
        f"ingested {data['ingested_count']} records; kept {kept}, "
        f"dropped {len(data['dropped'])} (legal status)"
    )
    _echo_run(run)


@main.command()
@click.option("--run-id", required=True)
@click.pass_obj
def categorize(service: Service, run_id: str) -> None:
    """Build feature vectors and the category dashboard."""
    run = service.categorize_run(run_id)
    table = service.category_table(run_id)
    for row in table:
        click.echo(
            f"  {row['key']:<30} patents={row['size']:<4} score={row['score']:.4f}"
        )
    _echo_run(run)


@main.command()
@click.option("--run-id", required=True)
@click.option("--labels", "label_paths", multiple=True, required=True,
              type=click.Path(exists=True),
              help="Label files; later files override earlier ones.")
@click.option("--out", required=True, type=click.Path())
@click.option("--n-trees", default=50, show_default=True)
@click.option("--learning-rate", default=0.1, show_default=True)
@click.option("--max-leaves", default=15, show_default=True)
@click.option("--ndcg-k", default=10, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.pass_obj
def train(service: Service, run_id: str, label_paths: tuple[str, ...], out: str,
          n_trees: int, learning_rate: float, max_leaves: int, ndcg_k: int, seed: int) -> None:
    """Train the ranking model on expert grades (plus any gate feedback)."""
    hyper = TrainHyper(
        n_trees=n_trees, learning_rate=learning_rate, max_leaves=max_leaves,
        ndcg_k=ndcg_k, seed=seed,
    )
    path = service.train_model(run_id, list(label_paths), out, hyper)
    meta = read_json(path)["training_meta"]
    click.echo(
        f"trained {meta['n_trees']} trees; training NDCG@{meta['ndcg_k']} "
        f"{meta['ndcg_trace'][0]:.4f} -> {meta['ndcg_trace'][-1]:.4f}; saved {path}"
    )


@main.command()
@click.option("--run-id", required=True)
@click.option("--profile", default=None, help="Weighting profile for this ranking.")
@click.option("--select-categories", default=None,
              help="Comma-separated category keys; omit to rank everything.")
@click.pass_obj
def rank(service: Service, run_id: str, profile: str | None, select_categories: str | None) -> None:
    """Rank the selected categories and open the PostRanking gate."""
    keys = [k.strip() for k in select_categories.split(",")] if select_categories else None
    run = service.rank_run(run_id, select_categories=keys, profile=profile)
    ranking = read_json(service.run_dir(run_id) / "ranking.json")["ranking"]
    for i, (pid, score) in enumerate(ranking[:10], start=1):
        click.echo(f"  {i:>2}. {pid}  {score:.4f}")
    _echo_run(run)


@main.command()
@click.option("--run-id", required=True)
@click.pass_obj
def match(service: Service, run_id: str) -> None:
    """Advance an approved ranking into seed/need matching (resume helper)."""
    run = service.match_run(run_id)
    _echo_run(run)


@main.command()
@click.option("--run-id", required=True)
@click.pass_obj
def report(service: Service, run_id: str) -> None:
    """Generate ontology reports for approved matches (resume helper)."""
    run = service.report_run(run_id)
    _echo_run(run)


@main.command()
@click.argument("gate_id", type=click.Choice(["PostRanking", "PostMatch", "FinalOntology"]))
@click.option("--run-id", required=True)
@click.option("--approve", "action", flag_value="Approved")
@click.option("--reject", "action", flag_value="Rejected")
@click.option("--amend", "amend_file", type=click.Path(exists=True),
              help="JSON file with {verdicts: [{item_id, verdict, grade?, note?}]}.")
@click.option("--reviewer", default="", help="Reviewer name for the audit trail.")
@click.pass_obj
def review(service: Service, gate_id: str, run_id: str, action: str | None,
           amend_file: str | None, reviewer: str) -> None:
    """Resolve a review gate and advance the pipeline."""
    verdicts: list[Decision] = []
    if amend_file:
        action = "Amended"
        spec = json.loads(Path(amend_file).read_text(encoding="utf-8"))
        verdicts = [
            Decision(
                item_id=v["item_id"],
                verdict=v["verdict"],
                grade=v.get("grade"),
                note=v.get("note", ""),
            )
            for v in spec["verdicts"]
        ]
    if action is None:
        raise click.UsageError("choose one of --approve, --reject, or --amend FILE")
    run = service.review_gate(run_id, gate_id, action, verdicts, reviewer=reviewer)
    _echo_run(run)


@main.command("export-labels")
@click.option("--run-id", required=True)
@click.pass_obj
def export_labels(service: Service, run_id: str) -> None:
    """Write gate feedback as training labels (labels_feedback.jsonl)."""
    path = service.export_labels(run_id)
    n = sum(1 for _ in open(path, encoding="utf-8"))
    click.echo(f"exported {n} label(s) to {path}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--console-dir", type=click.Path(), default=None,
              help="Static console bundle to serve at /.")
@click.pass_obj
def serve(service: Service, port: int, host: str, console_dir: str | None) -> None:
    """Serve the HTTP API (and the console, when built)."""
    import uvicorn

    from .api import make_app

    if console_dir is None:
        default_dir = Path("frontend") / "dist"
        console_dir = str(default_dir) if default_dir.is_dir() else None
    app = make_app(service.runs_dir, console_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main(prog_name="pp")

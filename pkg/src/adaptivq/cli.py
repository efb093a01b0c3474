"""Command-line entry point: validate the bank, simulate, train, report, serve.

The offline pipeline is three commands (simulate -> train -> report) so each
artifact file stays inspectable. All randomized commands take --seed and are
byte-reproducible.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import analytics, assignment, bank as bank_mod, history, predictor, simulator
from .bank import BankError, Level
from .history import HistoryError
from .predictor import PredictorError
from .simulator import SimulationError

_FIXTURE_DIR = Path(__file__).parent / "data"
FIXTURE_BANK = _FIXTURE_DIR / "bank.json"
FIXTURE_RATINGS = _FIXTURE_DIR / "ratings.json"
DEFAULT_SIM_CONFIG = _FIXTURE_DIR / "sim_config.json"

_DOMAIN_ERRORS = (
    BankError,
    HistoryError,
    PredictorError,
    SimulationError,
    analytics.AnalyticsError,
    assignment.AssignmentError,
)


@click.group()
def main() -> None:
    """Adaptive question personalization engine."""


@main.command("bank-validate")
@click.option("--bank", "bank_path", type=click.Path(), default=str(FIXTURE_BANK), show_default=True)
@click.option("--ratings", "ratings_path", type=click.Path(), default=None)
def bank_validate(bank_path: str, ratings_path: str | None) -> None:
    """Load a question bank, check invariants, and print fixture warnings."""
    try:
        loaded = bank_mod.load_bank(bank_path)
        ratings = bank_mod.load_ratings(ratings_path) if ratings_path else None
        warnings = bank_mod.validate_bank_fixture(loaded, ratings)
    except BankError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"bank ok: {len(loaded)} questions, {len(loaded.topics())} topics")
    for warning in warnings:
        click.echo(f"warning: {warning}")
    click.echo(f"{len(warnings)} warning(s)")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Simulation config file; packaged defaults when omitted.")
@click.option("--seed", type=int, default=None, help="Overrides the config seed.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--bank", "bank_path", type=click.Path(), default=None,
              help="Question bank to draw exercises from; synthesized when omitted.")
def simulate(config_path: str | None, seed: int | None, out_path: str, bank_path: str | None) -> None:
    """Run the two-phase experiment simulation and write the event log."""
    try:
        config = (
            simulator.load_sim_config(config_path)
            if config_path
            else simulator.load_sim_config(DEFAULT_SIM_CONFIG)
        )
        if seed is not None:
            config = replace(config, seed=seed)
        question_bank = bank_mod.load_bank(bank_path) if bank_path else None
        log = simulator.run_experiment(config, bank=question_bank)
        log.save(out_path)
    except _DOMAIN_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {len(log)} events to {out_path}")


@main.command()
@click.option("--log", "log_path", type=click.Path(), required=True)
@click.option("--split-seed", type=int, default=7, show_default=True)
@click.option("--out-model", type=click.Path(), required=True)
@click.option("--out-table", type=click.Path(), required=True)
@click.option("--learning-rate", type=float, default=0.1, show_default=True)
@click.option("--max-iterations", type=int, default=5000, show_default=True)
@click.option("--tolerance", type=float, default=1e-8, show_default=True)
@click.option("--l2-penalty", type=float, default=0.0, show_default=True)
def train(
    log_path: str,
    split_seed: int,
    out_model: str,
    out_table: str,
    learning_rate: float,
    max_iterations: int,
    tolerance: float,
    l2_penalty: float,
) -> None:
    """Fit the success predictor on an event log and freeze the percentile table.

    Held-out accuracy comes from a student-level 80/20 split; the shipped model
    and the table are then fit on every point.
    """
    try:
        config = predictor.TrainConfig(
            learning_rate=learning_rate,
            max_iterations=max_iterations,
            tolerance=tolerance,
            l2_penalty=l2_penalty,
        )
        log = history.EventLog.load(log_path)
        points = predictor.build_training_set(log)
        train_points, test_points = predictor.split_by_student(points, seed=split_seed)
        eval_model = predictor.train(train_points, config)
        test_accuracy = predictor.accuracy(eval_model, test_points)
        final_model = predictor.train(points, config)
        train_accuracy = predictor.accuracy(final_model, points)
        predictions = [predictor.predict(final_model, p.features) for p in points]
        table = assignment.build_percentile_table(
            predictions, source_model_hash=predictor.model_hash(final_model)
        )
        predictor.save_model(final_model, out_model, config)
        assignment.save_table(table, out_table)
    except _DOMAIN_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"points: {len(points)} ({len(train_points)} train / {len(test_points)} test)")
    click.echo(f"held-out accuracy (seed {split_seed}): {test_accuracy:.4f}")
    click.echo(f"full-data accuracy: {train_accuracy:.4f}")
    click.echo(f"model: bias={final_model.bias:.6f} w_success={final_model.w_success:.6f} "
               f"w_skip={final_model.w_skip:.6f} ({final_model.iterations} iterations)")
    click.echo(f"percentile table: p33={table.p33:.6f} p66={table.p66:.6f} n={table.n}")
    click.echo(f"wrote {out_model} and {out_table}")


@main.command()
@click.option("--log", "log_path", type=click.Path(), required=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]), default="table",
              show_default=True)
@click.option("--subgroup-level", type=click.Choice([lv.label for lv in bank_mod.LEVELS]),
              default=None, help="Also report Expected-vs-Control relative reductions "
                                 "for students assigned this level.")
@click.option("--include-bootstrap", is_flag=True, default=False,
              help="Include bootstrap-phase events in the metrics.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the report to a file instead of stdout.")
def report(
    log_path: str,
    alpha: float,
    fmt: str,
    subgroup_level: str | None,
    include_bootstrap: bool,
    out_path: str | None,
) -> None:
    """Per-arm metrics with pairwise significance tests over an event log."""
    phases = (
        (history.PHASE_BOOTSTRAP, history.PHASE_EXPERIMENT)
        if include_bootstrap
        else (history.PHASE_EXPERIMENT,)
    )
    try:
        log = history.EventLog.load(log_path)
        rep = analytics.group_report(log, alpha=alpha, phases=phases)
        sub = (
            analytics.subgroup_report(log, Level.parse(subgroup_level), alpha=alpha, phases=phases)
            if subgroup_level
            else None
        )
    except _DOMAIN_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if fmt == "table":
        text = analytics.render_table(rep)
        if sub:
            text += "\n" + _render_subgroup(sub)
    elif fmt == "json":
        payload = analytics.report_to_dict(rep)
        if sub:
            payload["subgroup"] = analytics.subgroup_to_dict(sub)
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = analytics.render_csv(rep)
        if sub:
            text += "\n" + _subgroup_csv(sub)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


def _render_subgroup(sub: analytics.SubgroupReport) -> str:
    lines = [
        f"Subgroup: students assigned {sub.level.label} "
        f"({sub.arm_a.value} n={sub.n_a} vs {sub.arm_b.value} n={sub.n_b})"
    ]
    for metric in analytics.METRICS:
        lines.append(
            f"  {metric}: {sub.arm_a.value} {sub.metrics_a[metric]:.3f} "
            f"vs {sub.arm_b.value} {sub.metrics_b[metric]:.3f} "
            f"-> relative reduction {sub.relative_reductions[metric]:+.1%}"
        )
    return "\n".join(lines) + "\n"


def _subgroup_csv(sub: analytics.SubgroupReport) -> str:
    lines = ["subgroup_level,metric,arm_a,value_a,arm_b,value_b,relative_reduction"]
    for metric in analytics.METRICS:
        lines.append(
            f"{sub.level.label},{metric},{sub.arm_a.value},{sub.metrics_a[metric]!r},"
            f"{sub.arm_b.value},{sub.metrics_b[metric]!r},{sub.relative_reductions[metric]!r}"
        )
    return "\n".join(lines) + "\n"


@main.command()
@click.option("--port", type=int, default=8000, show_default=True, envvar="ADAPTIVQ_PORT")
@click.option("--host", default="127.0.0.1", show_default=True, envvar="ADAPTIVQ_HOST")
@click.option("--bank", "bank_path", type=click.Path(), default=str(FIXTURE_BANK),
              show_default=True, envvar="ADAPTIVQ_BANK")
@click.option("--model", "model_path", type=click.Path(), required=True, envvar="ADAPTIVQ_MODEL")
@click.option("--table", "table_path", type=click.Path(), required=True, envvar="ADAPTIVQ_TABLE")
@click.option("--log", "log_path", type=click.Path(), required=True, envvar="ADAPTIVQ_LOG")
@click.option("--max-attempts", type=int, default=3, show_default=True,
              envvar="ADAPTIVQ_MAX_ATTEMPTS")
@click.option("--seed", type=int, default=0, show_default=True, envvar="ADAPTIVQ_SEED")
def serve(
    port: int,
    host: str,
    bank_path: str,
    model_path: str,
    table_path: str,
    log_path: str,
    max_attempts: int,
    seed: int,
) -> None:
    """Serve the live tutoring session API over HTTP."""
    import uvicorn

    from .service import TutorService, create_app

    try:
        service = TutorService(
            bank=bank_mod.load_bank(bank_path),
            model=predictor.load_model(model_path)[0],
            table=assignment.load_table(table_path),
            log_path=log_path,
            max_attempts=max_attempts,
            seed=seed,
        )
    except _DOMAIN_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    uvicorn.run(create_app(service), host=host, port=port)


if __name__ == "__main__":
    main()

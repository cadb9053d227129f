"""Command line interface.

Authoring-time validation, simulated experiments (against an in-process
service or a remote one), log replay, analytics, and `serve` to run the
HTTP service. Exit codes: 0 ok, 1 diagnostics/divergences, 2 errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analytics
from .datalog import import_tsv
from .errors import TutorlabError
from .harness import ApiClient, ExperimentScript, replay_store, run_experiment
from .pack import load_package, validate_package


@click.group()
def main():
    """Desk-scale tutoring research platform."""


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(2)


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=Path("./tutorlab-data"))
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(data_dir: Path, host: str, port: int):
    """Run the HTTP service with durable storage under DATA_DIR."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(data_dir=data_dir), host=host, port=port)


@main.command()
@click.option("--package", "package_path", required=True, type=click.Path(exists=True, path_type=Path))
def validate(package_path: Path):
    """Validate a package; exit 1 if any diagnostics."""
    try:
        package = load_package(package_path)
        diagnostics = validate_package(package)
    except TutorlabError as exc:
        _fail(exc)
    except (OSError, ValueError, KeyError) as exc:
        _fail(exc)
    for d in diagnostics:
        click.echo(str(d))
    if diagnostics:
        sys.exit(1)
    click.echo(f"package {package.name!r}: {len(package.graphs)} graph(s) valid")


@main.command()
@click.option("--script", "script_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--server", default=None, help="Base URL of a running service (default: in-process)")
def simulate(script_path: Path, out_dir: Path, server: str | None):
    """Run a scripted experiment; writes log.tsv, summary.json, conditions.csv."""
    try:
        script = ExperimentScript.load(script_path)
        client = None
        if server:
            import httpx

            client = ApiClient(httpx.Client(base_url=server, timeout=60.0))
        result = run_experiment(script, out_dir, client=client)
    except TutorlabError as exc:
        _fail(exc)
    click.echo(f"log: {result.log_path}")
    click.echo(f"summary: {result.summary_path}")


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--package", "package_path", required=True, type=click.Path(exists=True, path_type=Path))
def replay(log_path: Path, package_path: Path):
    """Re-trace a log against a package; exit 1 on divergences."""
    try:
        store = import_tsv(log_path)
        package = load_package(package_path)
        report = replay_store(store, package)
    except TutorlabError as exc:
        _fail(exc)
    for d in report.divergences:
        click.echo(
            f"row {d.row} session {d.session_id} {d.problem}/{d.step}: "
            f"logged {d.logged_outcome}, recomputed {d.recomputed_outcome}"
        )
    click.echo(f"checked {report.records_checked} records, {len(report.divergences)} divergence(s)")
    if report.divergences:
        sys.exit(1)


@main.command("fit-afm")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--lambda", "lambda_theta", default=1.0, type=float, show_default=True)
@click.option("--tol", default=1e-4, type=float, show_default=True)
@click.option("--max-iter", default=500, type=int, show_default=True)
@click.option("--zero-based", is_flag=True, help="Use prior-opportunity counts in the predictor")
def fit_afm_cmd(log_path: Path, lambda_theta: float, tol: float, max_iter: int, zero_based: bool):
    """Fit the additive factors model to a transaction log."""
    try:
        store = import_tsv(log_path)
        table = analytics.build_opportunity_table(store)
        config = analytics.AfmConfig(
            lambda_theta=lambda_theta, tol=tol, max_iter=max_iter,
            zero_based_opportunities=zero_based,
        )
        fit = analytics.fit_afm(table, config)
    except TutorlabError as exc:
        _fail(exc)
    out = {
        "log_likelihood": fit.log_likelihood,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "degenerate_kcs": list(fit.degenerate_kcs),
        "beta": fit.model.beta,
        "gamma": fit.model.gamma,
        "theta": fit.model.theta,
    }
    click.echo(json.dumps(out, indent=2, sort_keys=True))


@main.command("learning-curve")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--kc", required=True, help="KC name, or * for the pooled curve")
@click.option("--out", "out_path", default=None, type=click.Path(path_type=Path),
              help="Write TSV here instead of stdout")
def learning_curve_cmd(log_path: Path, kc: str, out_path: Path | None):
    """Error rate by opportunity for one KC (TSV)."""
    try:
        store = import_tsv(log_path)
        table = analytics.build_opportunity_table(store)
        if kc == "*":
            curve = analytics.aggregate_learning_curve(table)
        else:
            curve = analytics.learning_curve(table, kc)
    except TutorlabError as exc:
        _fail(exc)
    lines = ["opportunity\terror_rate\tn"]
    lines += [f"{p.opportunity}\t{p.error_rate:.6f}\t{p.n}" for p in curve.points]
    text = "\n".join(lines) + "\n"
    if out_path:
        out_path.write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


@main.command("compare-kc")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--models", "models_path", required=True, type=click.Path(exists=True, path_type=Path),
              help="JSON: {model name: {step or problem::step: [KCs]}}")
def compare_kc_cmd(log_path: Path, models_path: Path):
    """Rank candidate KC models by AIC and BIC."""
    try:
        store = import_tsv(log_path)
        models = json.loads(models_path.read_text(encoding="utf-8"))
        models = {name: {step: tuple(kcs) for step, kcs in mapping.items()}
                  for name, mapping in models.items()}
        comparison = analytics.compare_kc_models(store, models)
    except TutorlabError as exc:
        _fail(exc)
    except ValueError as exc:
        _fail(exc)
    click.echo("model\tk\tn\tLL\tAIC\tBIC")
    for s in comparison.scores:
        click.echo(f"{s.name}\t{s.n_params}\t{s.n_obs}\t{s.log_likelihood:.3f}\t{s.aic:.3f}\t{s.bic:.3f}")
    click.echo(f"ranking by AIC: {', '.join(comparison.by_aic)}")
    click.echo(f"ranking by BIC: {', '.join(comparison.by_bic)}")


@main.command()
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True, path_type=Path))
def census(registry_path: Path):
    """Apply the dataset census filter to a registry TSV."""
    try:
        entries = analytics.load_registry_tsv(registry_path)
    except TutorlabError as exc:
        _fail(exc)
    kept, count = analytics.census_filter(entries)
    for e in kept:
        click.echo(f"{e.dataset_id}\t{e.project_id}\t{e.name}\t{e.transactions}\t{e.start_date}")
    click.echo(f"kept {count} of {len(entries)} datasets")


if __name__ == "__main__":
    main()

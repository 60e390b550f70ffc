"""Command-line client for the budget-optimization pipeline.

Each subcommand builds the service's request model and calls the matching
handler, in process by default or over HTTP with ``--server URL``.  File
reading/writing stays on the client side so stages hand off through files
(dataset JSONL, model JSON, report JSON) and runs are reproducible from
their recorded seeds without any daemon.

Exit codes: 0 success, 1 runtime failure (estimator/schema/model errors,
reported on stderr), 2 usage errors.
"""

import functools
import json
import os
import sys
from pathlib import Path

import click

from . import __version__, dataset, evaluation, forest
from .errors import FtqBudgetError
from .service import app as handlers
from .service import schemas

PARAMS_ENV_VAR = "FTQBUDGET_PARAMS"

METRIC_CHOICES = click.Choice(["spacetime", "qubits", "time"])


class RemoteServiceError(FtqBudgetError):
    pass


def _canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _call(server, path, request, response_cls):
    """Dispatch one request: in-process handler call, or POST to --server."""
    if server is None:
        handler = {
            "/qasm/counts": handlers.qasm_counts,
            "/estimate": handlers.estimate_resources,
            "/budgets/sample": handlers.sample_budgets,
            "/budgets/normalize": handlers.normalize_budget,
            "/synth": handlers.synth_circuits,
            "/accumulate": handlers.accumulate_dataset,
            "/train": handlers.train_model,
            "/predict": handlers.predict_budget,
            "/evaluate": handlers.evaluate_model,
        }[path]
        return handler(request)
    import httpx

    url = server.rstrip("/") + path
    reply = httpx.post(url, json=request.model_dump(mode="json"), timeout=600.0)
    if reply.status_code != 200:
        try:
            detail = reply.json()
        except ValueError:
            detail = {"detail": reply.text}
        raise RemoteServiceError(
            f"{url} returned {reply.status_code}: "
            f"{detail.get('error', '')} {detail.get('detail', '')}".strip()
        )
    return response_cls.model_validate(reply.json())


def _fail(exc: FtqBudgetError):
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


def handle_domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FtqBudgetError as exc:
            _fail(exc)

    return wrapper


def _load_counts_model(path: Path, lenient: bool) -> schemas.LogicalCountsModel:
    """Read a circuit file: ``.qasm`` is parsed, anything else is counts JSON."""
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".qasm":
        from .circuits import derive_logical_counts
        from .qasm import parse_qasm

        counts = derive_logical_counts(parse_qasm(text))
    else:
        from .circuits import load_logical_counts

        counts = load_logical_counts(text, lenient=lenient)
    return schemas.LogicalCountsModel.from_core(counts)


def _load_params_model(params_path, lenient: bool):
    """--params file, or the FTQBUDGET_PARAMS fallback; None means defaults."""
    if params_path is None:
        params_path = os.environ.get(PARAMS_ENV_VAR) or None
    if params_path is None:
        return None
    path = Path(params_path)
    from .estimator import load_physical_params

    fmt = "toml" if path.suffix.lower() == ".toml" else "json"
    params = load_physical_params(path.read_text(encoding="utf-8"), fmt=fmt, strict=not lenient)
    return schemas.PhysicalParamsModel.from_core(params)


def _collect_circuit_files(target: Path):
    if target.is_dir():
        files = sorted(
            p for p in target.iterdir() if p.suffix.lower() in (".qasm", ".json")
        )
        if not files:
            raise click.UsageError(f"no .qasm or .json circuit files in {target}")
        return files
    return [target]


def _parse_budget_triple(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise click.UsageError("--budget expects three comma-separated numbers: L,TS,R")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise click.UsageError(f"--budget components must be numbers: {exc}")


server_option = click.option(
    "--server", default=None, metavar="URL", help="Send the request to a running service."
)
lenient_option = click.option(
    "--lenient", is_flag=True, help="Permit and ignore unknown fields in input files."
)
params_option = click.option(
    "--params",
    "params_path",
    default=None,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help=f"Physical-parameter file (JSON or TOML); default from ${PARAMS_ENV_VAR}.",
)


@click.group()
@click.version_option(version=__version__, prog_name="ftqbudget")
def main():
    """Resource-efficient error-budget distributions for fault-tolerant circuits."""


@main.command()
@click.option("--counts", "counts_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--budget-total", type=float, required=True)
@click.option("--budget", "budget_triple", default=None, metavar="L,TS,R",
              help="Raw component weights, normalized to the total; omitted = uniform.")
@params_option
@click.option("--metric", type=METRIC_CHOICES, default="spacetime", show_default=True)
@lenient_option
@server_option
@handle_domain_errors
def estimate(counts_path, budget_total, budget_triple, params_path, metric, lenient, server):
    """Estimate physical resources for one circuit."""
    request = schemas.EstimateRequest(
        counts=_load_counts_model(counts_path, lenient),
        budget_total=budget_total,
        budget=_parse_budget_triple(budget_triple) if budget_triple else None,
        params=_load_params_model(params_path, lenient),
        metric=metric,
    )
    response = _call(server, "/estimate", request, schemas.EstimateResponse)
    click.echo(json.dumps(response.model_dump(mode="json"), indent=2))


@main.command()
@click.option("--budget-total", type=float, required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@server_option
@handle_domain_errors
def sample(budget_total, n, seed, server):
    """Print N random budget distributions as JSON lines."""
    request = schemas.SampleRequest(budget_total=budget_total, n=n, seed=seed)
    response = _call(server, "/budgets/sample", request, schemas.SampleResponse)
    for distribution in response.distributions:
        click.echo(json.dumps(distribution.model_dump(mode="json")))


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--class", "size_class", type=click.Choice(sorted(["small", "medium", "large"])),
              default="small", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@server_option
@handle_domain_errors
def synth(n, seed, size_class, out_dir, server):
    """Generate synthetic logical-counts files for dataset building."""
    request = schemas.SynthRequest(n=n, seed=seed, size_class=size_class)
    response = _call(server, "/synth", request, schemas.SynthResponse)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .circuits import save_logical_counts

    for payload in response.circuits:
        target = out_dir / f"{payload.circuit_id}.json"
        target.write_text(save_logical_counts(payload.counts.to_core()), encoding="utf-8")
    click.echo(f"wrote {len(response.circuits)} circuits to {out_dir}", err=True)


@main.command()
@click.option("--circuits", "circuits_path", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="A circuit file or a directory of .qasm/.json files.")
@click.option("--n", "n_samples", type=int, required=True,
              help="Random candidate distributions per circuit.")
@click.option("--budget-total", type=float, required=True)
@click.option("--metric", type=METRIC_CHOICES, default="spacetime", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@params_option
@click.option("--jobs", type=int, default=1, show_default=True)
@lenient_option
@server_option
@handle_domain_errors
def accumulate(circuits_path, n_samples, budget_total, metric, seed, out_path, params_path,
               jobs, lenient, server):
    """Find the best sampled distribution per circuit; write a JSONL dataset."""
    circuits = [
        schemas.CircuitPayload(circuit_id=path.stem, counts=_load_counts_model(path, lenient))
        for path in _collect_circuit_files(circuits_path)
    ]
    request = schemas.AccumulateRequest(
        circuits=circuits,
        n_samples=n_samples,
        budget_total=budget_total,
        metric=metric,
        seed=seed,
        params=_load_params_model(params_path, lenient),
        jobs=jobs,
    )
    response = _call(server, "/accumulate", request, schemas.AccumulateResponse)
    dataset.save_dataset([r.to_core() for r in response.records], out_path)
    for skip in response.skipped:
        click.echo(
            f"skipped {skip.circuit_id} candidate {skip.candidate_index}: "
            f"{skip.error}: {skip.message}",
            err=True,
        )
    click.echo(f"wrote {len(response.records)} records to {out_path}", err=True)


@main.command()
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trees", type=int, default=100, show_default=True)
@click.option("--max-depth", type=int, default=12, show_default=True)
@click.option("--min-leaf", type=int, default=2, show_default=True)
@click.option("--features-per-split", type=int, default=4, show_default=True)
@click.option("--no-bootstrap", is_flag=True, help="Train every tree on the full dataset.")
@server_option
@handle_domain_errors
def train(dataset_path, out_path, seed, trees, max_depth, min_leaf, features_per_split,
          no_bootstrap, server):
    """Train the budget-prediction forest on a dataset file."""
    records = dataset.load_dataset(dataset_path)
    request = schemas.TrainRequest(
        records=[schemas.DatasetRecordModel.from_core(r) for r in records],
        seed=seed,
        hyperparams=schemas.HyperparamsModel(
            n_trees=trees,
            max_depth=max_depth,
            min_leaf=min_leaf,
            bootstrap=not no_bootstrap,
            features_per_split=features_per_split,
        ),
    )
    response = _call(server, "/train", request, schemas.TrainResponse)
    Path(out_path).write_text(_canonical_json(response.model), encoding="utf-8")
    click.echo(f"wrote model to {out_path}", err=True)


@main.command()
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--counts", "counts_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@lenient_option
@server_option
@handle_domain_errors
def predict(model_path, counts_path, lenient, server):
    """Predict a budget distribution for one circuit."""
    payload = forest.model_to_payload(forest.load_model(model_path))
    request = schemas.PredictRequest(
        model=payload, counts=_load_counts_model(counts_path, lenient)
    )
    response = _call(server, "/predict", request, schemas.PredictResponse)
    click.echo(json.dumps(response.distribution.model_dump(mode="json"), indent=2))


@main.command()
@click.option("--model", "model_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Pre-trained model; not needed with --retrain.")
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--split", "split_ratio", type=float, default=0.75, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Shuffle seed for the train/test split.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--retrain", is_flag=True, help="Train on the split's train side first.")
@click.option("--model-seed", type=int, default=None, help="Training seed (defaults to --seed).")
@click.option("--out-model", "out_model_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="With --retrain: also write the trained model here.")
@params_option
@click.option("--jobs", type=int, default=1, show_default=True)
@lenient_option
@server_option
@handle_domain_errors
def evaluate(model_path, dataset_path, split_ratio, seed, out_path, retrain, model_seed,
             out_model_path, params_path, jobs, lenient, server):
    """Split a dataset, score the model vs the uniform baseline, write a report."""
    if model_path is None and not retrain:
        raise click.UsageError("either --model or --retrain is required")
    if out_model_path is not None and not retrain:
        raise click.UsageError("--out-model only makes sense with --retrain")
    records = dataset.load_dataset(dataset_path)
    request = schemas.EvaluateRequest(
        records=[schemas.DatasetRecordModel.from_core(r) for r in records],
        model=forest.model_to_payload(forest.load_model(model_path)) if model_path else None,
        retrain=retrain,
        split_ratio=split_ratio,
        seed=seed,
        model_seed=model_seed,
        params=_load_params_model(params_path, lenient),
        jobs=jobs,
    )
    response = _call(server, "/evaluate", request, schemas.EvaluateResponse)
    Path(out_path).write_text(_canonical_json(response.report), encoding="utf-8")
    if out_model_path is not None and response.model is not None:
        Path(out_model_path).write_text(_canonical_json(response.model), encoding="utf-8")
    aggregates = response.report["aggregates"]
    click.echo(
        f"evaluated {response.report['metadata']['n_test']} circuits: "
        f"{100.0 * aggregates['fraction_improved']:.1f}% improved, "
        f"mean improvement {100.0 * aggregates['mean_improvement']:.1f}%",
        err=True,
    )


@main.command()
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv",
              show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@handle_domain_errors
def report(in_path, fmt, out_path):
    """Re-export a report file (CSV bundle for plotting, or JSON copy)."""
    loaded = evaluation.report_from_dict(json.loads(in_path.read_text(encoding="utf-8")))
    evaluation.export_report(loaded, out_path, fmt=fmt)
    click.echo(f"wrote {fmt} report to {out_path}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("ftqbudget.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()

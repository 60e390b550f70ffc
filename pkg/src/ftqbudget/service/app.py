"""HTTP facade over the core pipeline.

Every endpoint is a plain synchronous function taking one request model and
returning one response model; the CLI calls these functions in process and
a deployed service serves them over HTTP.  All state lives in the request:
the service itself is stateless and safe to scale out.
"""

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..budgets import normalize, sample_distributions, uniform_distribution
from ..circuits import derive_logical_counts
from ..dataset import CostMetric, accumulate, metric_value
from ..errors import FtqBudgetError
from ..estimator import DEFAULT_PARAMS, estimate
from ..evaluation import evaluate, split
from ..forest import (
    ForestHyperparams,
    model_from_payload,
    model_to_payload,
    predict_components,
    train,
)
from ..qasm import parse_qasm
from ..seeding import derive_rng
from ..synth import generate_synthetic_circuit
from . import schemas

app = FastAPI(
    title="ftqbudget",
    description="Error-budget distribution optimization for fault-tolerant quantum circuits.",
    version=__version__,
)


@app.exception_handler(FtqBudgetError)
def _domain_error_handler(request, exc: FtqBudgetError):
    return JSONResponse(
        status_code=422,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


def _params(model: schemas.PhysicalParamsModel | None):
    return model.to_core() if model is not None else DEFAULT_PARAMS


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", service="ftqbudget", version=__version__)


@app.post("/qasm/counts", response_model=schemas.QasmResponse)
def qasm_counts(req: schemas.QasmRequest) -> schemas.QasmResponse:
    gate_counts = parse_qasm(req.source)
    return schemas.QasmResponse(
        gates=dict(sorted(gate_counts.gates.items())),
        qubit_count=gate_counts.qubit_count,
        rotation_layer_count=gate_counts.rotation_layer_count,
        logical_counts=schemas.LogicalCountsModel.from_core(derive_logical_counts(gate_counts)),
    )


@app.post("/estimate", response_model=schemas.EstimateResponse)
def estimate_resources(req: schemas.EstimateRequest) -> schemas.EstimateResponse:
    counts = req.counts.to_core()
    if req.budget is None:
        budget = uniform_distribution(req.budget_total)
    else:
        budget = normalize(req.budget, req.budget_total)
    metric = CostMetric(req.metric)
    est = estimate(counts, budget, _params(req.params))
    return schemas.EstimateResponse.from_core(est, budget, metric, metric_value(est, metric))


@app.post("/budgets/sample", response_model=schemas.SampleResponse)
def sample_budgets(req: schemas.SampleRequest) -> schemas.SampleResponse:
    rng = derive_rng(req.seed)
    distributions = sample_distributions(rng, req.budget_total, req.n)
    return schemas.SampleResponse(
        distributions=[schemas.BudgetModel.from_core(d) for d in distributions]
    )


@app.post("/budgets/normalize", response_model=schemas.BudgetModel)
def normalize_budget(req: schemas.NormalizeRequest) -> schemas.BudgetModel:
    return schemas.BudgetModel.from_core(normalize(req.components, req.budget_total))


@app.post("/synth", response_model=schemas.SynthResponse)
def synth_circuits(req: schemas.SynthRequest) -> schemas.SynthResponse:
    circuits = []
    for index in range(req.n):
        counts = generate_synthetic_circuit(req.seed + index, req.size_class)
        circuits.append(
            schemas.CircuitPayload(
                circuit_id=f"synth-{req.size_class}-{req.seed + index}",
                counts=schemas.LogicalCountsModel.from_core(counts),
            )
        )
    return schemas.SynthResponse(circuits=circuits)


@app.post("/accumulate", response_model=schemas.AccumulateResponse)
def accumulate_dataset(req: schemas.AccumulateRequest) -> schemas.AccumulateResponse:
    circuits = [(c.circuit_id, c.counts.to_core()) for c in req.circuits]
    result = accumulate(
        circuits,
        n_samples=req.n_samples,
        total_budget=req.budget_total,
        metric=CostMetric(req.metric),
        seed=req.seed,
        params=_params(req.params),
        jobs=req.jobs,
    )
    return schemas.AccumulateResponse(
        records=[schemas.DatasetRecordModel.from_core(r) for r in result.records],
        skipped=[schemas.SkippedModel.from_core(s) for s in result.skipped],
    )


@app.post("/train", response_model=schemas.TrainResponse)
def train_model(req: schemas.TrainRequest) -> schemas.TrainResponse:
    records = [r.to_core() for r in req.records]
    hp = ForestHyperparams(**req.hyperparams.model_dump()) if req.hyperparams else None
    model = train(records, hyperparams=hp, seed=req.seed)
    return schemas.TrainResponse(model=model_to_payload(model))


@app.post("/predict", response_model=schemas.PredictResponse)
def predict_budget(req: schemas.PredictRequest) -> schemas.PredictResponse:
    model = model_from_payload(req.model)
    counts = req.counts.to_core()
    mean, variance = predict_components(model, counts)
    distribution = normalize(mean, model.metadata.total_budget)
    return schemas.PredictResponse(
        distribution=schemas.BudgetModel.from_core(distribution),
        tree_variance=(float(variance[0]), float(variance[1]), float(variance[2])),
    )


@app.post("/evaluate", response_model=schemas.EvaluateResponse)
def evaluate_model(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    records = [r.to_core() for r in req.records]
    train_records, test_records = split(records, ratio=req.split_ratio, seed=req.seed)
    trained_payload = None
    if req.retrain:
        hp = ForestHyperparams(**req.hyperparams.model_dump()) if req.hyperparams else None
        model_seed = req.seed if req.model_seed is None else req.model_seed
        model = train(train_records, hyperparams=hp, seed=model_seed)
        trained_payload = model_to_payload(model)
    elif req.model is not None:
        model = model_from_payload(req.model)
    else:
        raise FtqBudgetError("evaluate needs a trained model or retrain=true")
    report = evaluate(
        model,
        test_records,
        params=_params(req.params),
        jobs=req.jobs,
        split_ratio=req.split_ratio,
        split_seed=req.seed,
    )
    return schemas.EvaluateResponse(report=report.to_dict(), model=trained_payload)

"""HTTP facade over the simulator: validate, run, and replay scenarios.

Each endpoint takes a full scenario document and is stateless; nothing is
kept between requests, so any number of clients can share one instance.
Error payloads carry a `kind` the CLI maps onto its exit codes:
validation_error / parse_error (1), invariant_violation (2), livelock (3).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..engine import check_invariants, run
from ..errors import (
    EventBudgetExceededError,
    InvariantViolationError,
    ParseError,
    ValidationError,
)
from ..metrics import compute_metrics, replay_check
from ..scenario import parse_scenario
from .schemas import (
    MetricsOut,
    ReplayRequest,
    ReplayResponse,
    RunRequest,
    RunResponse,
    ValidateRequest,
    ValidateResponse,
)


def _parse_or_422(document: dict):
    try:
        return parse_scenario(document)
    except ValidationError as exc:
        raise HTTPException(
            status_code=422,
            detail={"kind": "validation_error", "entity": exc.entity, "reason": exc.reason},
        ) from exc
    except ParseError as exc:
        raise HTTPException(
            status_code=422,
            detail={"kind": "parse_error", "line": exc.line, "reason": exc.reason},
        ) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="vcsim", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/validate", response_model=ValidateResponse)
    def validate(request: ValidateRequest) -> ValidateResponse:
        scenario = _parse_or_422(request.scenario)
        return ValidateResponse(
            valid=True,
            retailer=scenario.retailer,
            warehouses=[w.party_id for w in scenario.warehouses],
            manufacturers=[m.party_id for m in scenario.manufacturers],
            customers=list(scenario.customers),
            orders=len(scenario.orders),
        )

    @app.post("/run", response_model=RunResponse)
    def run_scenario(request: RunRequest) -> RunResponse:
        scenario = _parse_or_422(request.scenario)
        try:
            log, world = run(scenario)
        except EventBudgetExceededError as exc:
            raise HTTPException(
                status_code=409, detail={"kind": "livelock", "reason": str(exc)}
            ) from exc
        if request.check:
            try:
                check_invariants(world)
            except InvariantViolationError as exc:
                raise HTTPException(
                    status_code=409,
                    detail={"kind": "invariant_violation", "reason": str(exc)},
                ) from exc
        text = log.render()
        metrics = compute_metrics(text)
        return RunResponse(
            log=text,
            metrics=MetricsOut(**metrics.as_flat_dict()),
            final_time=log.final_time,
            event_count=log.event_count,
        )

    @app.post("/replay", response_model=ReplayResponse)
    def replay(request: ReplayRequest) -> ReplayResponse:
        scenario = _parse_or_422(request.scenario)
        result = replay_check(scenario)
        return ReplayResponse(
            passed=result.passed,
            line_number=result.line_number,
            first_run=result.first_run,
            second_run=result.second_run,
        )

    return app


app = create_app()

"""HTTP service exposing the solver workflows.

Run with ``uvicorn otmarket.service.app:app``.  Certification failures are
reported in the payload (``certified: false``), not as HTTP errors; HTTP 400
is reserved for malformed inputs and solver breakdowns.
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from ..dual_solver import PricePair, SolverOptions
from ..errors import OTMarketError
from ..generate import economy_to_scenario, indifference_grid_economy, random_goods_economy
from ..scenario import scenario_to_model
from ..workflows import (
    counterexample_rows,
    economy_from_model,
    run_equilibrium,
    run_oracle,
    run_solve,
    run_verify,
    triplets_to_coupling,
)
from . import schemas


def _solver_options(payload: schemas.SolverOptionsPayload) -> SolverOptions:
    return SolverOptions(
        max_iters=payload.max_iters,
        stop_tol=payload.stop_tol,
        step0=payload.step0,
        keep_trace=payload.keep_trace,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="otmarket",
        description="Constrained transport solving and market equilibrium",
    )

    @app.exception_handler(OTMarketError)
    async def _domain_error(request, exc: OTMarketError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/solve", response_model=schemas.SolveResponse)
    def solve(request: schemas.SolveRequest):
        model = scenario_to_model(request.scenario.as_document())
        doc = run_solve(
            model,
            options=_solver_options(request.options),
            gap_tol=request.gap_tol,
            feas_tol=request.feas_tol,
        )
        doc.pop("trace", None)
        doc.pop("subcommand", None)
        return doc

    @app.post("/oracle", response_model=schemas.OracleResponse)
    def oracle(request: schemas.OracleRequest):
        model = scenario_to_model(request.scenario.as_document())
        doc = run_oracle(model)
        doc.pop("subcommand", None)
        return doc

    @app.post("/verify", response_model=schemas.VerifyResponse)
    def verify(request: schemas.VerifyRequest):
        model = scenario_to_model(request.scenario.as_document())
        coupling = triplets_to_coupling(
            request.coupling.triplets, model.n_types, model.n_alternatives
        )
        prices = PricePair(p=request.prices.p, q=request.prices.q)
        doc = run_verify(
            model,
            coupling,
            prices,
            gap_tol=request.gap_tol,
            feas_tol=request.feas_tol,
        )
        doc.pop("subcommand", None)
        return doc

    @app.post("/equilibrium", response_model=schemas.EquilibriumResponse)
    def equilibrium(request: schemas.EquilibriumRequest):
        if (request.scenario is None) == (request.goods is None):
            raise HTTPException(
                status_code=400,
                detail="provide exactly one of scenario or goods",
            )
        if request.scenario is not None:
            economy = economy_from_model(
                scenario_to_model(request.scenario.as_document())
            )
        else:
            goods = list(request.goods)
            if request.supply:
                unknown = set(request.supply) - set(goods)
                if unknown:
                    raise HTTPException(
                        status_code=400,
                        detail=f"supply names unknown goods: {sorted(unknown)}",
                    )
            if request.seed is not None:
                if request.supply:
                    raise HTTPException(
                        status_code=400,
                        detail="seeded economies draw their own supply",
                    )
                economy = random_goods_economy(
                    request.seed, request.types, len(goods)
                )
            else:
                supply = [(request.supply or {}).get(g, 0.5) for g in goods]
                economy = indifference_grid_economy(goods, request.types, supply)
        doc = run_equilibrium(
            economy,
            options=_solver_options(request.options),
            gap_tol=request.gap_tol,
            feas_tol=request.feas_tol,
            eq_tol=request.eq_tol,
        )
        doc.pop("trace", None)
        doc.pop("subcommand", None)
        return doc

    @app.post("/counterexample", response_model=schemas.CounterexampleResponse)
    def counterexample(request: schemas.CounterexampleRequest):
        rows = [
            {"n": row["n"], "m": row["m"], "distance": str(row["distance"])}
            for row in counterexample_rows(request.max_level)
        ]
        return {
            "rows": rows,
            "generated_at": datetime.now(timezone.utc).isoformat(),
        }

    return app


app = create_app()

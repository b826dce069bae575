"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class ScenarioPayload(BaseModel):
    points: list[list[float]]
    weights: list[float]
    alternatives: list[str]
    surplus: list[list[float]]
    A: Optional[list[list[float]]] = None
    a: Optional[list[float]] = None
    B: Optional[list[list[float]]] = None
    b: Optional[list[float]] = None

    def as_document(self) -> dict:
        doc = {
            "points": self.points,
            "weights": self.weights,
            "alternatives": self.alternatives,
            "surplus": self.surplus,
        }
        if self.A is not None:
            doc["A"] = self.A
        if self.a is not None:
            doc["a"] = self.a
        if self.B is not None:
            doc["B"] = self.B
        if self.b is not None:
            doc["b"] = self.b
        return doc


class SolverOptionsPayload(BaseModel):
    max_iters: int = Field(default=5000, ge=1)
    stop_tol: float = Field(default=1e-6, gt=0)
    step0: Optional[float] = Field(default=None, gt=0)
    keep_trace: bool = False


class PricesPayload(BaseModel):
    p: list[float] = []
    q: list[float] = []


class CouplingPayload(BaseModel):
    triplets: list[tuple[int, int, float]]


class FeasibilityPayload(BaseModel):
    type_marginal_residual: float
    ineq_residual: float
    eq_residual: float
    feasible: bool
    tol: float


class DualityReportPayload(BaseModel):
    primal_value: float
    dual_value: float
    gap: float
    cs_ineq_residual: float
    support_residual: float
    feasibility: FeasibilityPayload


class SolverResultPayload(BaseModel):
    prices: PricesPayload
    potential_value: float
    iterations: int
    subgradient_norm_at_best: float


class SolveRequest(BaseModel):
    scenario: ScenarioPayload
    options: SolverOptionsPayload = SolverOptionsPayload()
    gap_tol: float = Field(default=1e-3, gt=0)
    feas_tol: float = Field(default=1e-8, gt=0)


class SolveResponse(BaseModel):
    solver: SolverResultPayload
    coupling: CouplingPayload
    report: DualityReportPayload
    certified: bool
    gap_tol: float
    feas_tol: float
    generated_at: str


class OracleRequest(BaseModel):
    scenario: ScenarioPayload


class OracleDualsPayload(BaseModel):
    p: list[float]
    q: list[float]
    type_potentials: list[float]


class OracleResponse(BaseModel):
    status: str
    value: Optional[float] = None
    coupling: Optional[CouplingPayload] = None
    duals: Optional[OracleDualsPayload] = None
    generated_at: str


class VerifyRequest(BaseModel):
    scenario: ScenarioPayload
    coupling: CouplingPayload
    prices: PricesPayload
    gap_tol: float = Field(default=1e-6, gt=0)
    feas_tol: float = Field(default=1e-8, gt=0)


class VerifyResponse(BaseModel):
    report: DualityReportPayload
    certified: bool
    gap_tol: float
    feas_tol: float
    generated_at: str


class EquilibriumRequest(BaseModel):
    scenario: Optional[ScenarioPayload] = None
    goods: Optional[list[str]] = None
    types: int = Field(default=16, ge=1)
    supply: Optional[dict[str, float]] = None
    seed: Optional[int] = Field(default=None, ge=0)
    options: SolverOptionsPayload = SolverOptionsPayload()
    gap_tol: float = Field(default=1e-3, gt=0)
    feas_tol: float = Field(default=1e-8, gt=0)
    eq_tol: float = Field(default=1e-3, gt=0)


class EquilibriumReportPayload(BaseModel):
    supply_residual: float
    utility_residual: float
    per_good_excess: list[float]
    ok: bool
    tol: float


class EquilibriumResponse(BaseModel):
    goods: list[str]
    prices: dict[str, float]
    per_good_excess_demand: dict[str, float]
    potential_value: float
    iterations: int
    report: DualityReportPayload
    equilibrium: EquilibriumReportPayload
    certified: bool
    gap_tol: float
    feas_tol: float
    eq_tol: float
    generated_at: str


class CounterexampleRequest(BaseModel):
    max_level: int = Field(default=12, ge=2, le=30)


class CounterexampleRow(BaseModel):
    n: int
    m: int
    distance: str  # exact rational, e.g. "1"


class CounterexampleResponse(BaseModel):
    rows: list[CounterexampleRow]
    generated_at: str

"""Scenario data types, validation, marginals, and primal feasibility checks.

A scenario pairs a weighted point cloud of types with a finite set of
alternatives, a tabulated surplus matrix, and linear constraints on the
alternative-side marginal.  ``validate_scenario`` is the single entry point
that turns the four raw pieces into a ``ValidatedModel``; every downstream
operation takes the validated bundle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteEntry,
    NonPositiveWeight,
    ShapeMismatch,
    WeightSumOff,
)

WEIGHT_SUM_TOL = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TypeCloud:
    """Finitely supported type distribution: sample points and their masses."""

    points: np.ndarray  # (n, m)
    weights: np.ndarray  # (n,)

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(np.atleast_2d(self.points)))
        object.__setattr__(self, "weights", _frozen_array(self.weights))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class AlternativeSet:
    """Labelled finite set of alternatives."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class SurplusMatrix:
    """Tabulated surplus: rows are type points, columns are alternatives."""

    values: np.ndarray  # (n, |X|)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(np.atleast_2d(self.values)))


@dataclass(frozen=True)
class ConstraintSystem:
    """Inequality block (A, a) and equality block (B, b) on the alternative marginal.

    Either block may be empty (k = 0 and/or l = 0); the problem then degenerates
    toward plain semi-discrete transport with only the type-marginal constraint.
    """

    A: np.ndarray  # (k, |X|)
    a: np.ndarray  # (k,)
    B: np.ndarray  # (l, |X|)
    b: np.ndarray  # (l,)

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen_array(np.atleast_2d(self.A)))
        object.__setattr__(self, "a", _frozen_array(np.atleast_1d(self.a)))
        object.__setattr__(self, "B", _frozen_array(np.atleast_2d(self.B)))
        object.__setattr__(self, "b", _frozen_array(np.atleast_1d(self.b)))

    @classmethod
    def empty(cls, n_alternatives: int) -> "ConstraintSystem":
        return cls(
            A=np.zeros((0, n_alternatives)),
            a=np.zeros(0),
            B=np.zeros((0, n_alternatives)),
            b=np.zeros(0),
        )

    @property
    def n_ineq(self) -> int:
        return self.A.shape[0]

    @property
    def n_eq(self) -> int:
        return self.B.shape[0]


@dataclass(frozen=True)
class Coupling:
    """Nonnegative mass matrix over type points x alternatives."""

    mass: np.ndarray  # (n, |X|)

    def __post_init__(self):
        arr = np.array(np.atleast_2d(self.mass), dtype=float)
        if np.any(arr < 0):
            raise ValueError("coupling mass must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "mass", arr)


@dataclass(frozen=True)
class FeasibilityReport:
    """Residuals of a coupling against the primal constraints."""

    type_marginal_residual: float
    ineq_residual: float
    eq_residual: float
    feasible: bool
    tol: float

    def as_dict(self) -> dict:
        return {
            "type_marginal_residual": self.type_marginal_residual,
            "ineq_residual": self.ineq_residual,
            "eq_residual": self.eq_residual,
            "feasible": self.feasible,
            "tol": self.tol,
        }


@dataclass(frozen=True)
class ValidatedModel:
    """Validated scenario bundle.

    ``cost_columns`` stacks the constraint columns: column x holds
    (A_x, B_x), so a stacked price vector (p, q) prices alternative x at
    ``cost_columns[:, x] @ (p, q)``.
    """

    cloud: TypeCloud
    alternatives: AlternativeSet
    surplus: SurplusMatrix
    constraints: ConstraintSystem
    cost_columns: np.ndarray = field(init=False)  # (k + l, |X|)

    def __post_init__(self):
        stacked = np.vstack([self.constraints.A, self.constraints.B])
        object.__setattr__(self, "cost_columns", _frozen_array(stacked))

    @property
    def n_types(self) -> int:
        return self.cloud.n_points

    @property
    def n_alternatives(self) -> int:
        return self.alternatives.size

    @property
    def n_ineq(self) -> int:
        return self.constraints.n_ineq

    @property
    def n_eq(self) -> int:
        return self.constraints.n_eq

    @property
    def n_prices(self) -> int:
        return self.n_ineq + self.n_eq


def validate_scenario(
    cloud: TypeCloud,
    alts: AlternativeSet,
    surplus: SurplusMatrix,
    cons: ConstraintSystem,
) -> ValidatedModel:
    """Check every scenario invariant and return the validated bundle.

    Weights within ``WEIGHT_SUM_TOL`` of unit mass are renormalized to sum
    to one; anything further off is rejected.

    Raises:
        DimensionMismatch: any shape inconsistency between the four pieces.
        NonPositiveWeight: some weight is <= 0.
        WeightSumOff: weights are not within 1e-12 of summing to 1.
        NonFiniteEntry: NaN or infinity anywhere in the numeric data.
    """
    n = cloud.n_points
    if n == 0:
        raise DimensionMismatch("type cloud must contain at least one point")
    if cloud.dimension < 1:
        raise DimensionMismatch("type points must have dimension >= 1")
    if cloud.weights.shape != (n,):
        raise DimensionMismatch(
            f"expected {n} weights, got shape {cloud.weights.shape}"
        )
    if alts.size < 1:
        raise DimensionMismatch("alternative set must be nonempty")
    if len(set(alts.labels)) != alts.size:
        raise DimensionMismatch("alternative labels must be distinct")

    n_alt = alts.size
    if surplus.values.shape != (n, n_alt):
        raise DimensionMismatch(
            f"surplus must be {n}x{n_alt}, got {surplus.values.shape}"
        )
    if cons.A.shape[1] != n_alt and cons.n_ineq > 0:
        raise DimensionMismatch(
            f"A must have {n_alt} columns, got {cons.A.shape[1]}"
        )
    if cons.a.shape != (cons.n_ineq,):
        raise DimensionMismatch("a must have one entry per row of A")
    if cons.B.shape[1] != n_alt and cons.n_eq > 0:
        raise DimensionMismatch(
            f"B must have {n_alt} columns, got {cons.B.shape[1]}"
        )
    if cons.b.shape != (cons.n_eq,):
        raise DimensionMismatch("b must have one entry per row of B")

    for name, arr in (
        ("points", cloud.points),
        ("weights", cloud.weights),
        ("surplus", surplus.values),
        ("A", cons.A),
        ("a", cons.a),
        ("B", cons.B),
        ("b", cons.b),
    ):
        if arr.size and not np.all(np.isfinite(arr)):
            raise NonFiniteEntry(f"{name} contains a non-finite entry")

    if np.any(cloud.weights <= 0):
        raise NonPositiveWeight("every weight must be strictly positive")
    total = float(cloud.weights.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumOff(f"weights sum to {total!r}, expected 1")
    if total != 1.0:
        cloud = TypeCloud(points=cloud.points, weights=cloud.weights / total)

    # Empty blocks may carry a zero-column placeholder; normalize their width.
    if cons.n_ineq == 0 or cons.n_eq == 0:
        A = cons.A if cons.n_ineq else np.zeros((0, n_alt))
        B = cons.B if cons.n_eq else np.zeros((0, n_alt))
        cons = ConstraintSystem(A=A, a=cons.a, B=B, b=cons.b)

    return ValidatedModel(
        cloud=cloud, alternatives=alts, surplus=surplus, constraints=cons
    )


def _check_coupling_shape(coupling: Coupling, model: ValidatedModel) -> None:
    expected = (model.n_types, model.n_alternatives)
    if coupling.mass.shape != expected:
        raise ShapeMismatch(
            f"coupling is {coupling.mass.shape}, model expects {expected}"
        )


def marginals(coupling: Coupling, model: ValidatedModel):
    """Row and column mass sums of a coupling.

    Returns ``(type_marginal, alt_marginal)`` where ``type_marginal[i]`` is the
    mass carried by point i and ``alt_marginal[x]`` the mass on alternative x.
    """
    _check_coupling_shape(coupling, model)
    return coupling.mass.sum(axis=1), coupling.mass.sum(axis=0)


def coupling_surplus(coupling: Coupling, model: ValidatedModel) -> float:
    """Total surplus generated by a coupling: sum of surplus * mass."""
    _check_coupling_shape(coupling, model)
    return float(np.sum(model.surplus.values * coupling.mass))


def check_primal_feasibility(
    coupling: Coupling, model: ValidatedModel, tol: float
) -> FeasibilityReport:
    """Measure how far a coupling is from satisfying the primal constraints."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    type_marginal, alt_marginal = marginals(coupling, model)
    cons = model.constraints

    type_res = float(np.max(np.abs(type_marginal - model.cloud.weights)))
    if cons.n_ineq:
        ineq_res = float(np.max(np.maximum(0.0, cons.A @ alt_marginal - cons.a)))
    else:
        ineq_res = 0.0
    if cons.n_eq:
        eq_res = float(np.max(np.abs(cons.B @ alt_marginal - cons.b)))
    else:
        eq_res = 0.0

    feasible = type_res <= tol and ineq_res <= tol and eq_res <= tol
    return FeasibilityReport(
        type_marginal_residual=type_res,
        ineq_residual=ineq_res,
        eq_residual=eq_res,
        feasible=feasible,
        tol=tol,
    )

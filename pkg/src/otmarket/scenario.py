"""Scenario document schema: JSON in, validated model out, and back.

A scenario is a single JSON object with fields ``points`` (array of arrays),
``weights``, ``alternatives``, ``surplus`` (row-major), and optional
constraint blocks ``A``/``a`` and ``B``/``b``.  A missing block means zero
rows of that kind.  All numbers are read as 64-bit floats.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import jsonio
from .errors import DimensionMismatch
from .model import (
    AlternativeSet,
    ConstraintSystem,
    SurplusMatrix,
    TypeCloud,
    ValidatedModel,
    validate_scenario,
)

REQUIRED_FIELDS = ("points", "weights", "alternatives", "surplus")


def scenario_to_model(doc: dict) -> ValidatedModel:
    """Build and validate a model from a parsed scenario document."""
    if not isinstance(doc, dict):
        raise DimensionMismatch("scenario document must be a JSON object")
    for name in REQUIRED_FIELDS:
        if name not in doc:
            raise DimensionMismatch(f"scenario is missing field {name!r}")

    cloud = TypeCloud(
        points=np.asarray(doc["points"], dtype=float),
        weights=np.asarray(doc["weights"], dtype=float),
    )
    alts = AlternativeSet(labels=tuple(doc["alternatives"]))
    surplus = SurplusMatrix(values=np.asarray(doc["surplus"], dtype=float))
    n_alt = alts.size

    if ("A" in doc) != ("a" in doc):
        raise DimensionMismatch("fields A and a must be given together")
    if ("B" in doc) != ("b" in doc):
        raise DimensionMismatch("fields B and b must be given together")

    if "A" in doc:
        A = np.asarray(doc["A"], dtype=float).reshape(-1, n_alt)
        a = np.asarray(doc["a"], dtype=float).ravel()
    else:
        A, a = np.zeros((0, n_alt)), np.zeros(0)
    if "B" in doc:
        B = np.asarray(doc["B"], dtype=float).reshape(-1, n_alt)
        b = np.asarray(doc["b"], dtype=float).ravel()
    else:
        B, b = np.zeros((0, n_alt)), np.zeros(0)

    cons = ConstraintSystem(A=A, a=a, B=B, b=b)
    return validate_scenario(cloud, alts, surplus, cons)


def model_to_scenario(model: ValidatedModel) -> dict:
    """Scenario document for a validated model (inverse of scenario_to_model)."""
    doc = {
        "points": [list(row) for row in model.cloud.points],
        "weights": list(model.cloud.weights),
        "alternatives": list(model.alternatives.labels),
        "surplus": [list(row) for row in model.surplus.values],
    }
    if model.n_ineq:
        doc["A"] = [list(row) for row in model.constraints.A]
        doc["a"] = list(model.constraints.a)
    if model.n_eq:
        doc["B"] = [list(row) for row in model.constraints.B]
        doc["b"] = list(model.constraints.b)
    return doc


def load_scenario(path) -> ValidatedModel:
    return scenario_to_model(jsonio.load(Path(path)))


def save_scenario(doc: dict, path) -> None:
    jsonio.dump(doc, path)

"""Reduced dual potential: evaluation, subgradients, and projected descent.

For a stacked price vector (p, q) with p >= 0, each type's indirect utility
is the best surplus net of alternative cost, and the potential is the
weighted sum of indirect utilities plus the constraint bounds priced at
(p, q).  The potential is convex and piecewise linear; it is minimized by
projected subgradient descent over a box that provably brackets a minimizer
whenever one exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    IndexOutOfRange,
    NonFiniteEncountered,
    PricesOutsideK,
    ShapeMismatch,
)
from .model import ValidatedModel

DEFAULT_TIE_TOL = 1e-9


@dataclass(frozen=True)
class PricePair:
    """Dual variables: p for the inequality block (>= 0), q for the equality block."""

    p: np.ndarray  # (k,)
    q: np.ndarray  # (l,)

    def __post_init__(self):
        p = np.array(np.atleast_1d(self.p), dtype=float)
        q = np.array(np.atleast_1d(self.q), dtype=float)
        if np.any(p < 0):
            raise PricesOutsideK(f"inequality duals must be >= 0, got {p}")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.p, self.q])

    @classmethod
    def from_stacked(cls, vec: np.ndarray, n_ineq: int) -> "PricePair":
        vec = np.asarray(vec, dtype=float)
        return cls(p=vec[:n_ineq], q=vec[n_ineq:])

    @classmethod
    def zeros(cls, n_ineq: int, n_eq: int) -> "PricePair":
        return cls(p=np.zeros(n_ineq), q=np.zeros(n_eq))


@dataclass(frozen=True)
class IndirectUtilityRow:
    """Best net payoff of one type and the alternatives that attain it."""

    value: float
    argmax_set: tuple[int, ...]


@dataclass(frozen=True)
class PriceBox:
    """Axis-aligned search box inside the dual feasible cone."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(np.atleast_1d(self.lower), dtype=float)
        upper = np.array(np.atleast_1d(self.upper), dtype=float)
        if lower.shape != upper.shape:
            raise ShapeMismatch("box bounds must have identical shape")
        if np.any(lower > upper):
            raise ValueError("box must be nonempty")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def diameter(self) -> float:
        if self.dimension == 0:
            return 0.0
        return float(np.linalg.norm(self.upper - self.lower))


@dataclass(frozen=True)
class SolverOptions:
    """Options for ``minimize_potential``.

    ``step0 = None`` uses box diameter / 10.  ``step_rule`` is "diminishing"
    (alpha_k = step0 / sqrt(k + 1)) or "polyak", which requires
    ``polyak_target``, a known lower value of the potential (available in
    test setups where the direct oracle has already been run).
    ``polyak_relax`` scales the Polyak step; values in (0, 2) keep the
    classical convergence guarantee, and values near 2 traverse flat kinks
    of the piecewise-linear potential much faster.
    """

    max_iters: int = 5000
    stop_tol: float = 1e-6
    step0: Optional[float] = None
    step_rule: str = "diminishing"
    polyak_target: Optional[float] = None
    polyak_relax: float = 1.0
    keep_trace: bool = False


@dataclass(frozen=True)
class DualSolution:
    """Best iterate found by the descent."""

    prices: PricePair
    potential_value: float
    iterations: int
    subgradient_norm_at_best: float
    trace: Optional[tuple[tuple[int, float, float], ...]] = None


def _check_prices(model: ValidatedModel, prices: PricePair) -> None:
    if prices.p.shape != (model.n_ineq,) or prices.q.shape != (model.n_eq,):
        raise ShapeMismatch(
            f"prices have shape ({prices.p.shape[0]}, {prices.q.shape[0]}), "
            f"model expects ({model.n_ineq}, {model.n_eq})"
        )


def _net_payoffs(model: ValidatedModel, stacked: np.ndarray) -> np.ndarray:
    """(n, |X|) matrix of surplus net of alternative cost at the given prices."""
    costs = stacked @ model.cost_columns
    return model.surplus.values - costs[None, :]


def indirect_utility(
    model: ValidatedModel,
    i: int,
    prices: PricePair,
    tie_tol: float = DEFAULT_TIE_TOL,
) -> IndirectUtilityRow:
    """Best net payoff of type i and the alternatives within tie_tol of it."""
    if tie_tol < 0:
        raise ValueError("tie_tol must be >= 0")
    if not 0 <= i < model.n_types:
        raise IndexOutOfRange(f"type index {i} out of range [0, {model.n_types})")
    _check_prices(model, prices)
    net = _net_payoffs(model, prices.stacked)[i]
    value = float(net.max())
    argmax = tuple(int(x) for x in np.flatnonzero(net >= value - tie_tol))
    return IndirectUtilityRow(value=value, argmax_set=argmax)


def indirect_utility_values(model: ValidatedModel, prices: PricePair) -> np.ndarray:
    """Vector of indirect utilities over all type points."""
    _check_prices(model, prices)
    return _net_payoffs(model, prices.stacked).max(axis=1)


def potential(model: ValidatedModel, prices: PricePair) -> float:
    """Weighted indirect utility plus constraint bounds priced at (p, q)."""
    _check_prices(model, prices)
    u = _net_payoffs(model, prices.stacked).max(axis=1)
    cons = model.constraints
    return float(
        model.cloud.weights @ u + cons.a @ prices.p + cons.b @ prices.q
    )


def subgradient(
    model: ValidatedModel,
    prices: PricePair,
    tie_rule: Optional[Callable[[Sequence[int]], int]] = None,
) -> np.ndarray:
    """One subgradient of the potential at the given prices.

    Equals (a, b) minus the weighted sum of the cost columns of each type's
    selected best alternative: the constraint bounds minus aggregate demand.
    The default selection is the lowest best alternative index.
    """
    _check_prices(model, prices)
    net = _net_payoffs(model, prices.stacked)
    if tie_rule is None:
        choice = net.argmax(axis=1)  # first maximizer = lowest index
    else:
        best = net.max(axis=1)
        choice = np.array(
            [
                tie_rule(tuple(int(x) for x in np.flatnonzero(row == m)))
                for row, m in zip(net, best)
            ]
        )
    bounds = np.concatenate([model.constraints.a, model.constraints.b])
    demand = model.cost_columns[:, choice] @ model.cloud.weights
    return bounds - demand


def price_box(model: ValidatedModel) -> PriceBox:
    """Search box guaranteed to bracket a minimizer whenever one exists.

    Half-width M = 2 * (max |surplus| + max column l1-cost + |a|_1 + |b|_1 + 1):
    beyond that scale a coordinate's demand has saturated (universally chosen
    or universally dropped), so pulling the coordinate back toward the box
    never increases the potential.
    """
    cons = model.constraints
    phi_max = float(np.max(np.abs(model.surplus.values)))
    col_norm = (
        float(np.max(np.abs(model.cost_columns).sum(axis=0)))
        if model.n_prices
        else 0.0
    )
    m = 2.0 * (
        phi_max
        + col_norm
        + float(np.abs(cons.a).sum())
        + float(np.abs(cons.b).sum())
        + 1.0
    )
    lower = np.concatenate([np.zeros(model.n_ineq), np.full(model.n_eq, -m)])
    upper = np.full(model.n_prices, m)
    return PriceBox(lower=lower, upper=upper)


def project_to_box(prices: PricePair, box: PriceBox) -> PricePair:
    """Componentwise clamp of the stacked price vector into the box."""
    n_ineq = prices.p.shape[0]
    if box.dimension != n_ineq + prices.q.shape[0]:
        raise ShapeMismatch(
            f"box dimension {box.dimension} does not match prices"
        )
    clipped = np.clip(prices.stacked, box.lower, box.upper)
    return PricePair.from_stacked(clipped, n_ineq)


def minimize_potential(
    model: ValidatedModel, options: SolverOptions = SolverOptions()
) -> DualSolution:
    """Projected subgradient descent on the potential over the price box.

    Tracks the best iterate seen; stops early when the subgradient norm falls
    below ``stop_tol`` (a necessary condition only -- the potential is
    non-smooth, so ``max_iters`` is the guaranteed terminator).
    """
    if options.max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if options.stop_tol <= 0:
        raise ValueError("stop_tol must be positive")
    if options.step_rule not in ("diminishing", "polyak"):
        raise ValueError(f"unknown step_rule {options.step_rule!r}")
    if options.step_rule == "polyak" and options.polyak_target is None:
        raise ValueError("polyak step rule requires polyak_target")

    box = price_box(model)
    n_ineq = model.n_ineq
    x = np.clip(np.zeros(box.dimension), box.lower, box.upper)

    step0 = options.step0 if options.step0 is not None else box.diameter / 10.0

    best_x = x.copy()
    best_f = np.inf
    best_g_norm = np.inf
    trace: list[tuple[int, float, float]] = []
    iterations = 0

    def evaluate(vec: np.ndarray):
        prices = PricePair.from_stacked(vec, n_ineq)
        f = potential(model, prices)
        g = subgradient(model, prices)
        if not np.isfinite(f) or (g.size and not np.all(np.isfinite(g))):
            raise NonFiniteEncountered(
                "potential or subgradient is non-finite; scenario is malformed"
            )
        return f, g, float(np.linalg.norm(g))

    for k in range(options.max_iters):
        f, g, g_norm = evaluate(x)
        if f < best_f:
            best_f = f
            best_x = x.copy()
            best_g_norm = g_norm
        if options.keep_trace:
            trace.append((k, f, g_norm))
        if g_norm <= options.stop_tol:
            break
        if options.step_rule == "polyak":
            gap = f - options.polyak_target
            if gap <= 0:
                break
            alpha = options.polyak_relax * gap / (g_norm * g_norm)
        else:
            alpha = step0 / np.sqrt(k + 1.0)
        x = np.clip(x - alpha * g, box.lower, box.upper)
        iterations = k + 1
    else:
        # the loop exhausted max_iters; score the trailing iterate too
        f, g, g_norm = evaluate(x)
        if f < best_f:
            best_f = f
            best_x = x.copy()
            best_g_norm = g_norm
        if options.keep_trace:
            trace.append((options.max_iters, f, g_norm))

    return DualSolution(
        prices=PricePair.from_stacked(best_x, n_ineq),
        potential_value=best_f,
        iterations=iterations,
        subgradient_norm_at_best=best_g_norm,
        trace=tuple(trace) if options.keep_trace else None,
    )

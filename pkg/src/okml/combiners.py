"""Higher-level learners that combine the per-kernel online regressors.

Two combiners operate on the same bank of single-kernel learners:

* the simplex scheme: after the per-kernel learners advance (a fork-join any
  number of workers may execute), a diagonal QP over the probability simplex
  picks convex weights minimizing the separable surrogate cost
  sum_p theta_p * window_loss_p + theta_p^2 * (eta/2) * ||f_p||^2;
* the OMKR baseline: unconstrained weights updated by plain gradient descent
  on the window cost with a halving learning-rate schedule.

Every reduction over learners or window samples runs in a fixed order, so
results are bit-identical regardless of the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import simplex_qp
from .errors import ConfigurationError
from .norma import Expansion, NormaConfig, SquaredLoss, norm_sq, norma_step
from .simplex_qp import QpInstance
from .streams import SlidingWindow

WORKERS_ENV_VAR = "OKML_THREADS"

REG_GRADIENT_FORMS = ("as_written", "derived")


@dataclass(frozen=True)
class CostParams:
    """Regularizer weight and pluggable loss for the window cost
    sum_i loss(f(x_i), y_i) + (eta/2) ||f||^2."""

    eta: float = 0.01
    loss: SquaredLoss = SquaredLoss()

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ConfigurationError(f"eta must be > 0, got {self.eta}")


@dataclass(frozen=True)
class OmkrSchedule:
    """Learning rate initial * 2^-floor((n-1)/halving_period), clipped at floor."""

    initial: float = 8e-4
    halving_period: int = 50
    floor: float = 1e-5

    def __post_init__(self):
        if not self.initial > 0.0:
            raise ConfigurationError(f"initial rate must be > 0, got {self.initial}")
        if self.halving_period < 1:
            raise ConfigurationError(f"halving_period must be >= 1, got {self.halving_period}")
        if not 0.0 <= self.floor <= self.initial:
            raise ConfigurationError(
                f"floor must be in [0, initial], got {self.floor} vs {self.initial}"
            )

    def rate(self, step: int) -> float:
        return max(self.initial * 2.0 ** -((step - 1) // self.halving_period), self.floor)


@dataclass(frozen=True)
class SchemeState:
    """Learner bank, current convex weights, and the step they belong to."""

    learners: tuple[Expansion, ...]
    theta: np.ndarray
    step: int

    def __post_init__(self):
        object.__setattr__(self, "learners", tuple(self.learners))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if len(self.learners) != self.theta.size:
            raise ConfigurationError("one weight per learner required")


@dataclass(frozen=True)
class OmkrState:
    """Learner bank, unconstrained combination weights, step, and schedule."""

    learners: tuple[Expansion, ...]
    weights: np.ndarray
    step: int
    schedule: OmkrSchedule

    def __post_init__(self):
        object.__setattr__(self, "learners", tuple(self.learners))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if len(self.learners) != self.weights.size:
            raise ConfigurationError("one weight per learner required")


def initial_scheme_state(kernels) -> SchemeState:
    learners = tuple(Expansion.empty(k) for k in kernels)
    p = len(learners)
    return SchemeState(learners, np.full(p, 1.0 / p), step=1)


def initial_omkr_state(kernels, schedule: OmkrSchedule) -> OmkrState:
    learners = tuple(Expansion.empty(k) for k in kernels)
    return OmkrState(learners, np.zeros(len(learners)), step=1, schedule=schedule)


def resolve_workers(workers: int | None = None) -> int:
    """Worker count for the learner fan-out; None reads OKML_THREADS (0 = auto)."""
    if workers is None:
        raw = os.environ.get(WORKERS_ENV_VAR, "").strip()
        if not raw:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigurationError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from None
    if workers < 0:
        raise ConfigurationError(f"worker count must be >= 0, got {workers}")
    return workers if workers else (os.cpu_count() or 1)


def advance_learners(
    learners,
    cfgs,
    window: SlidingWindow,
    workers: int | None = None,
) -> tuple[Expansion, ...]:
    """Advance every learner one step; pure per-learner transitions collected
    in index order, so the result is independent of scheduling."""
    learners = tuple(learners)
    cfgs = _per_learner(cfgs, len(learners))
    n = resolve_workers(workers)
    if n <= 1 or len(learners) <= 1:
        return tuple(norma_step(f, c, window) for f, c in zip(learners, cfgs))
    with ThreadPoolExecutor(max_workers=min(n, len(learners))) as pool:
        return tuple(pool.map(norma_step, learners, cfgs, [window] * len(learners)))


def _per_learner(cfgs, p: int):
    if isinstance(cfgs, NormaConfig):
        return (cfgs,) * p
    cfgs = tuple(cfgs)
    if len(cfgs) != p:
        raise ConfigurationError(f"expected {p} learner configs, got {len(cfgs)}")
    return cfgs


def window_predictions(learners, window: SlidingWindow) -> np.ndarray:
    """Matrix F[p, i] = f_p(x_i) over the window, ascending p and window index."""
    xs = np.asarray([s.x for s in window])
    return np.stack([f.evaluate_many(xs) for f in learners])


def assemble_qp(
    learners,
    cost: CostParams,
    window: SlidingWindow,
    delta: float = simplex_qp.DEFAULT_DELTA,
) -> QpInstance:
    """QP data from the learner bank: a_p = (eta/2) ||f_p||^2,
    b_p = window loss of f_p."""
    ys = np.asarray([s.y for s in window])
    preds = window_predictions(learners, window)
    b = np.sum(cost.loss.value(preds, ys[None, :]), axis=1)
    a = 0.5 * cost.eta * np.asarray([norm_sq(f) for f in learners])
    return QpInstance(a=a, b=b, delta=delta)


def scheme_step(
    state: SchemeState,
    cfgs,
    cost: CostParams,
    window: SlidingWindow,
    delta: float = simplex_qp.DEFAULT_DELTA,
    workers: int | None = None,
) -> SchemeState:
    """One scheme iteration: learners advance in parallel, then the convex
    weights are re-solved exactly.  An empty window (first step: no data seen
    yet) leaves the learners untouched and sets uniform weights."""
    p = len(state.learners)
    if len(window) == 0:
        return SchemeState(state.learners, np.full(p, 1.0 / p), state.step + 1)
    learners = advance_learners(state.learners, cfgs, window, workers)
    solution = simplex_qp.solve(assemble_qp(learners, cost, window, delta))
    return SchemeState(learners, solution.theta, state.step + 1)


def predict(state, x: float) -> float:
    """Combined estimate at x: weights dotted with per-learner estimates,
    accumulated in learner order."""
    evals = np.asarray([f.evaluate(x) for f in state.learners])
    return float(_state_weights(state) @ evals)


def predict_many(state, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    evals = np.stack([f.evaluate_many(xs) for f in state.learners])
    return _state_weights(state) @ evals


def _state_weights(state) -> np.ndarray:
    return state.theta if isinstance(state, SchemeState) else state.weights


def combined_norm_sq(weights: np.ndarray, learners) -> float:
    """Squared norm of the weighted combination under the direct-sum norm:
    sum_p weights_p^2 ||f_p||^2."""
    norms = np.asarray([norm_sq(f) for f in learners])
    w = np.asarray(weights, dtype=float)
    return float((w * w) @ norms)


def window_cost(preds: np.ndarray, ys: np.ndarray, cost: CostParams, norm_sq_value: float) -> float:
    """Window cost of a predictor given its predictions on the window."""
    return float(np.sum(cost.loss.value(preds, ys)) + 0.5 * cost.eta * norm_sq_value)


def incurred_cost(estimate, cost: CostParams, window: SlidingWindow, norm_sq_value: float) -> float:
    """Window losses of a pointwise predictor plus the scaled squared norm."""
    xs = [s.x for s in window]
    ys = np.asarray([s.y for s in window])
    preds = np.asarray([estimate(x) for x in xs])
    return window_cost(preds, ys, cost, norm_sq_value)


def upper_bound_cost(theta, learners, cost: CostParams, window: SlidingWindow) -> float:
    """Separable surrogate: sum_p theta_p * window_loss_p
    + theta_p^2 * (eta/2) * ||f_p||^2.  Dominates the combined predictor's
    window cost and is tight at simplex vertices."""
    theta = np.asarray(theta, dtype=float)
    ys = np.asarray([s.y for s in window])
    preds = window_predictions(learners, window)
    loss_sums = np.sum(cost.loss.value(preds, ys[None, :]), axis=1)
    norms = np.asarray([norm_sq(f) for f in learners])
    return float(theta @ loss_sums + (0.5 * cost.eta) * ((theta * theta) @ norms))


def omkr_gradient(
    weights: np.ndarray,
    learners,
    cost: CostParams,
    window: SlidingWindow,
    reg_gradient: str = "as_written",
) -> np.ndarray:
    """Gradient of the window cost in the combination weights.

    The loss part is F loss'(w'F, y) summed over the window.  The regularizer
    part has two published forms: "as_written" uses eta * a_p * w_p with
    a_p = (eta/2) ||f_p||^2; "derived" uses 2 * a_p * w_p, the exact gradient
    of (eta/2) * sum_p w_p^2 ||f_p||^2 under the direct-sum norm.
    """
    if reg_gradient not in REG_GRADIENT_FORMS:
        raise ConfigurationError(
            f"reg_gradient must be one of {REG_GRADIENT_FORMS}, got {reg_gradient!r}"
        )
    w = np.asarray(weights, dtype=float)
    ys = np.asarray([s.y for s in window])
    preds = window_predictions(learners, window)
    lprime = np.asarray(cost.loss.derivative(w @ preds, ys), dtype=float)
    loss_grad = preds @ lprime
    a = 0.5 * cost.eta * np.asarray([norm_sq(f) for f in learners])
    reg = (cost.eta * a * w) if reg_gradient == "as_written" else (2.0 * a * w)
    return loss_grad + reg


def omkr_step(
    state: OmkrState,
    cfgs,
    cost: CostParams,
    window: SlidingWindow,
    reg_gradient: str = "as_written",
    workers: int | None = None,
) -> OmkrState:
    """One OMKR iteration: learners advance, then one gradient step on the
    combination weights at the scheduled rate for the new step."""
    if len(window) == 0:
        return replace(state, step=state.step + 1)
    learners = advance_learners(state.learners, cfgs, window, workers)
    step = state.step + 1
    grad = omkr_gradient(state.weights, learners, cost, window, reg_gradient)
    weights = state.weights - state.schedule.rate(step) * grad
    return OmkrState(learners, weights, step, state.schedule)

"""Budgeted single-kernel online regressor (NORMA-style functional descent).

State is a kernel expansion f = sum_i alpha_i k(x_i, .) with one center per
time index.  Each step shrinks every coefficient by gamma = 1 - lr * reg,
subtracts lr * loss'(f(x_i), y_i) from the coefficients of samples still in
the sliding window, appends the newest sample as a fresh center, and drops
the oldest centers beyond the budget.

The Gram matrix of the current centers is cached and extended one row per
step, so the squared RKHS norm alpha' K alpha never re-evaluates kernels.
`functional_gradient_oracle` recomputes the same update the slow, literal way
(fresh unmerged gradient terms, then a merge) and exists only to cross-check
`norma_step` in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ProtocolError
from .kernels import KernelSpec, gram_matrix, kernel_column
from .streams import Sample, SlidingWindow


class SquaredLoss:
    """loss(p, y) = (p - y)^2 with derivative 2 (p - y) in the prediction."""

    kind = "squared"

    @staticmethod
    def value(prediction, target):
        d = np.asarray(prediction) - np.asarray(target)
        return d * d

    @staticmethod
    def derivative(prediction, target):
        return 2.0 * (np.asarray(prediction) - np.asarray(target))


_LOSSES = {"squared": SquaredLoss}


def make_loss(kind: str):
    try:
        return _LOSSES[kind]()
    except KeyError:
        raise ConfigurationError(
            f"unknown loss {kind!r}; available: {sorted(_LOSSES)}"
        ) from None


@dataclass
class NormaConfig:
    """Step size, regularizer, expansion budget, and window length.

    The shrink factor gamma = 1 - learning_rate * regularizer must lie
    strictly inside (0, 1).
    """

    learning_rate: float = 0.05
    regularizer: float = 0.01
    budget: int = 100
    window_length: int = 10

    def __post_init__(self):
        problems = []
        if not self.learning_rate > 0.0:
            problems.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if not self.regularizer > 0.0:
            problems.append(f"regularizer must be > 0, got {self.regularizer}")
        if self.budget < 1:
            problems.append(f"budget must be >= 1, got {self.budget}")
        if self.window_length < 1:
            problems.append(f"window_length must be >= 1, got {self.window_length}")
        g = 1.0 - self.learning_rate * self.regularizer
        if not (0.0 < g < 1.0):
            problems.append(
                f"gamma = 1 - learning_rate * regularizer must be in (0, 1), got {g}"
            )
        if problems:
            raise ConfigurationError("; ".join(problems))

    @property
    def gamma(self) -> float:
        return 1.0 - self.learning_rate * self.regularizer


@dataclass(frozen=True)
class Expansion:
    """Kernel expansion: centers (time index, input), aligned coefficients,
    cached Gram matrix of the centers, and cached squared norm alpha' K alpha."""

    kernel: KernelSpec
    indices: np.ndarray
    points: np.ndarray
    coeffs: np.ndarray
    gram: np.ndarray
    norm_sq: float

    def __post_init__(self):
        m = self.indices.size
        if not (self.points.size == m and self.coeffs.size == m and self.gram.shape == (m, m)):
            raise ConfigurationError("expansion arrays are inconsistent in length")
        if m > 1 and not np.all(np.diff(self.indices) > 0):
            raise ConfigurationError("expansion center indices must be strictly increasing")

    @classmethod
    def empty(cls, kernel: KernelSpec) -> "Expansion":
        return cls(
            kernel=kernel,
            indices=np.empty(0, dtype=np.int64),
            points=np.empty(0),
            coeffs=np.empty(0),
            gram=np.empty((0, 0)),
            norm_sq=0.0,
        )

    @classmethod
    def from_centers(cls, kernel: KernelSpec, indices, points, coeffs) -> "Expansion":
        """Build from raw centers, computing the Gram and norm caches fresh."""
        indices = np.asarray(indices, dtype=np.int64)
        points = np.asarray(points, dtype=float)
        coeffs = np.asarray(coeffs, dtype=float)
        gram = gram_matrix(kernel, points) if points.size else np.empty((0, 0))
        norm = float(coeffs @ gram @ coeffs) if points.size else 0.0
        return cls(kernel, indices, points, coeffs, gram, norm)

    @property
    def size(self) -> int:
        return self.indices.size

    def evaluate(self, x: float) -> float:
        if self.size == 0:
            return 0.0
        return float(self.coeffs @ kernel_column(self.kernel, self.points, x))

    def evaluate_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.size == 0:
            return np.zeros(xs.shape)
        d = self.points[:, None] - xs[None, :]
        k = np.exp(-(d * d) / (2.0 * self.kernel.width * self.kernel.width))
        return self.coeffs @ k


def evaluate(exp: Expansion, x: float) -> float:
    return exp.evaluate(x)


def norm_sq(exp: Expansion) -> float:
    """Squared RKHS norm of the expansion, served from the cache."""
    return exp.norm_sq


def recompute_norm_sq(exp: Expansion) -> float:
    """Full O(m^2) recomputation from scratch; test-time cross-check."""
    if exp.size == 0:
        return 0.0
    return float(exp.coeffs @ gram_matrix(exp.kernel, exp.points) @ exp.coeffs)


def _window_residual_grads(exp: Expansion, window: SlidingWindow, loss) -> np.ndarray:
    """loss'(f(x_i), y_i) at the pre-update estimate for every window sample."""
    xs = np.asarray(window.xs())
    ys = np.asarray(window.ys())
    return np.asarray(loss.derivative(exp.evaluate_many(xs), ys), dtype=float)


def norma_step(
    exp: Expansion,
    cfg: NormaConfig,
    window: SlidingWindow,
    new_sample: Sample | None = None,
    loss=None,
) -> Expansion:
    """Advance the expansion one step given the current window.

    The window's newest element is the sample being absorbed; `new_sample`,
    when given, is checked against it.  All loss derivatives are evaluated at
    the incoming (pre-update) estimate.
    """
    if len(window) == 0:
        raise ProtocolError("norma_step invoked before any data")
    loss = loss if loss is not None else SquaredLoss()
    newest = window.newest
    if new_sample is not None and (new_sample.index, new_sample.x) != (newest.index, newest.x):
        raise ProtocolError(
            f"new_sample {new_sample} is not the window's newest element {newest}"
        )
    if exp.size and exp.indices[-1] >= newest.index:
        raise ProtocolError(
            f"expansion already contains a center at or past index {newest.index}"
        )

    lam = cfg.learning_rate
    grads = _window_residual_grads(exp, window, loss)

    coeffs = exp.coeffs * cfg.gamma

    # Window samples other than the newest adjust their existing coefficients;
    # samples whose center was already truncated contribute nothing.
    w_indices = np.asarray(window.indices()[:-1], dtype=np.int64)
    if exp.size and w_indices.size:
        pos = np.searchsorted(exp.indices, w_indices)
        pos_clip = np.minimum(pos, exp.size - 1)
        present = exp.indices[pos_clip] == w_indices
        coeffs[pos_clip[present]] -= lam * grads[:-1][present]

    indices = np.append(exp.indices, newest.index)
    points = np.append(exp.points, newest.x)
    coeffs = np.append(coeffs, -lam * grads[-1])

    col = kernel_column(exp.kernel, exp.points, newest.x)
    gram = np.empty((exp.size + 1, exp.size + 1))
    gram[: exp.size, : exp.size] = exp.gram
    gram[: exp.size, exp.size] = col
    gram[exp.size, : exp.size] = col
    gram[exp.size, exp.size] = 1.0

    while indices.size > cfg.budget:
        indices = indices[1:]
        points = points[1:]
        coeffs = coeffs[1:]
        gram = gram[1:, 1:]

    norm = float(coeffs @ gram @ coeffs) if coeffs.size else 0.0
    return Expansion(exp.kernel, indices, points, np.ascontiguousarray(coeffs),
                     np.ascontiguousarray(gram), norm)


def functional_gradient_oracle(
    exp: Expansion,
    cfg: NormaConfig,
    window: SlidingWindow,
    loss=None,
) -> Expansion:
    """The same update done literally: shrink, add one fresh gradient term per
    window sample, then merge centers that share a time index.  No budget."""
    if len(window) == 0:
        raise ProtocolError("oracle step invoked before any data")
    loss = loss if loss is not None else SquaredLoss()
    grads = _window_residual_grads(exp, window, loss)

    merged: dict[int, list[float]] = {}
    for idx, x, c in zip(exp.indices, exp.points, exp.coeffs):
        merged[int(idx)] = [float(x), cfg.gamma * float(c)]
    for sample, g in zip(window, grads):
        term = -cfg.learning_rate * float(g)
        if sample.index in merged:
            merged[sample.index][1] += term
        else:
            merged[sample.index] = [sample.x, term]

    order = sorted(merged)
    return Expansion.from_centers(
        exp.kernel,
        indices=order,
        points=[merged[i][0] for i in order],
        coeffs=[merged[i][1] for i in order],
    )

"""Exact solver for simplex-constrained diagonal quadratic programs.

Minimizes  theta' diag(a + delta) theta + b' theta  over the probability
simplex {theta >= 0, sum(theta) = 1}.  The solver is direct, not iterative:
sort b ascending, locate the support size rho with a single forward pass
(the set of indices passing the sign test is always a prefix of the sorted
order), recover the equality multiplier mu in closed form, and clip.

`oracle_solve` is an independent projected-gradient method on the same
objective, kept around purely as a correctness cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

DEFAULT_DELTA = 1e-12


@dataclass(frozen=True)
class QpInstance:
    """Diagonal QP data: quadratic diagonal a (>0 after adding delta), linear b."""

    a: np.ndarray
    b: np.ndarray
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.size == 0 or b.size == 0:
            raise ConfigurationError("QP instance must have at least one component")
        if a.shape != b.shape or a.ndim != 1:
            raise ConfigurationError(
                f"a and b must be 1-d of equal length, got {a.shape} vs {b.shape}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InputError("QP instance entries must be finite")
        if self.delta < 0.0 or not np.isfinite(self.delta):
            raise ConfigurationError(f"delta must be a finite nonnegative real, got {self.delta}")
        if not np.all(a + self.delta > 0.0):
            raise ConfigurationError("every effective diagonal entry a_p + delta must be > 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def size(self) -> int:
        return self.a.size

    def effective_a(self) -> np.ndarray:
        return self.a + self.delta

    def objective(self, theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(theta @ (self.effective_a() * theta) + self.b @ theta)


@dataclass(frozen=True)
class QpSolution:
    """Minimizer theta, equality multiplier mu, and support size rho.

    The inequality multipliers are recoverable as
    lambda_p = 2 theta_p a_p + b_p + mu.
    """

    theta: np.ndarray
    mu: float
    rho: int
    phi: np.ndarray = field(repr=False, default=None)  # sign-test values, sorted order


def solve(instance: QpInstance) -> QpSolution:
    """Exact minimizer over the simplex.

    Steps: (1) stable-sort b ascending into u, carrying a along into v;
    (2) rho = largest j with u_j - (sum_{i<=j} u_i/v_i + 2)/(sum_{i<=j} 1/v_i) < 0,
    found by stopping at the first nonnegative value (the passing set is a
    prefix); (3) mu = -(2 + sum_{i<=rho} u_i/v_i) / (sum_{i<=rho} 1/v_i);
    (4) theta_p = max(-(b_p + mu)/(2 a_p), 0) back in original index order.
    """
    a = instance.effective_a()
    b = instance.b
    n = instance.size

    if n == 1:
        # Degenerate feasible set: the simplex in one dimension is the point 1.
        mu = float(-(2.0 + b[0] / a[0]) / (1.0 / a[0]))
        return QpSolution(theta=np.array([1.0]), mu=mu, rho=1, phi=np.array([-2.0 * a[0]]))

    order = np.argsort(b, kind="stable")
    u = b[order]
    v = a[order]

    cum_ub = np.cumsum(u / v)
    cum_inv = np.cumsum(1.0 / v)
    phi = u - (cum_ub + 2.0) / cum_inv

    # phi_1 = -2 v_1 < 0 always, so rho >= 1; the first nonnegative phi, if
    # any, ends the prefix of negatives.
    nonneg = np.nonzero(phi >= 0.0)[0]
    rho = int(nonneg[0]) if nonneg.size else n

    mu = float(-(2.0 + cum_ub[rho - 1]) / cum_inv[rho - 1])
    theta = np.maximum(-(b + mu) / (2.0 * a), 0.0)
    return QpSolution(theta=theta, mu=mu, rho=rho, phi=phi)


def project_to_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection of y onto the probability simplex (sort-based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, y.size + 1)
    rho = np.nonzero(u + (1.0 - css) / j > 0.0)[0][-1]
    tau = (css[rho] - 1.0) / (rho + 1)
    return np.maximum(y - tau, 0.0)


def oracle_solve(instance: QpInstance, iterations: int, step: float) -> np.ndarray:
    """Projected-gradient descent on the same objective; feasible at every iterate.

    Starts from the uniform point and projects back onto the simplex after
    each gradient step.  The returned point's objective upper-bounds the true
    minimum and converges to it as iterations grow (for step below 1/L with
    L = 2 max(a + delta)).
    """
    if iterations < 1:
        raise ConfigurationError(f"iterations must be >= 1, got {iterations}")
    if not (step > 0.0 and np.isfinite(step)):
        raise ConfigurationError(f"step must be a positive finite real, got {step}")
    a = instance.effective_a()
    b = instance.b
    theta = np.full(instance.size, 1.0 / instance.size)
    for _ in range(iterations):
        grad = 2.0 * a * theta + b
        theta = project_to_simplex(theta - step * grad)
    return theta

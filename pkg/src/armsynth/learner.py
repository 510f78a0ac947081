"""Gaussian-process surrogate search over the link-length box.

The robustness oracle is expensive and has no closed form, so the length
synthesis loop models it with a GP (squared-exponential kernel over
box-normalized coordinates, mean-centered observations) and probes the
candidate grid by an adaptive confidence bound: the exploration term is
weighted by the square root of the min-max normalized posterior mean, so
uncertainty in promising regions counts for more than uncertainty in
regions that already look bad.

Oracle failures (unreachable geometry and the like) are recorded in the
history and enter the surrogate as a large negative stand-in value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArmsynthError, NumericError

SURROGATE_FAILURE = -1e3
ACQ_DELTA = 0.1
GRID_PER_DIM = 24
GRID_MAX_POINTS = 20000


@dataclass
class GPConfig:
    lengthscale: float = 0.5   # in normalized box coordinates
    signal_var: float = 1.0
    noise_var: float = 1e-8    # sigma_n = 1e-4


class GPState:
    """GP regression state over a box domain."""

    def __init__(self, bounds, config: GPConfig | None = None):
        self.bounds = np.atleast_2d(np.asarray(bounds, dtype=float))  # (d, 2)
        self.config = config or GPConfig()
        self.X = np.zeros((0, self.bounds.shape[0]))
        self.y = np.zeros(0)
        self._chol = None
        self._alpha = None
        self._ybar = 0.0

    def _normalize(self, pts: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        span = np.where(hi > lo, hi - lo, 1.0)
        return (pts - lo) / span

    def _kernel(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        an, bn = self._normalize(a), self._normalize(b)
        d2 = ((an[:, None, :] - bn[None, :, :]) ** 2).sum(axis=2)
        return self.config.signal_var * np.exp(-0.5 * d2 / self.config.lengthscale**2)

    def add(self, theta, value: float) -> None:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        self.X = np.vstack([self.X, theta[None, :]])
        self.y = np.append(self.y, float(value))
        self._refit()

    def _refit(self) -> None:
        n = self.X.shape[0]
        K = self._kernel(self.X, self.X) + self.config.noise_var * np.eye(n)
        jitter = 0.0
        for _ in range(12):
            try:
                self._chol = np.linalg.cholesky(K + jitter * np.eye(n))
                break
            except np.linalg.LinAlgError:
                jitter = max(jitter * 10.0, 1e-12)
        else:
            raise NumericError("gram matrix is not positive definite after jitter escalation")
        self._ybar = float(self.y.mean())
        resid = self.y - self._ybar
        self._alpha = np.linalg.solve(self._chol.T, np.linalg.solve(self._chol, resid))

    def posterior(self, points) -> tuple[np.ndarray, np.ndarray]:
        """(mean, variance) at query points, shape (N,)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.X.shape[0] == 0:
            return (np.zeros(points.shape[0]),
                    np.full(points.shape[0], self.config.signal_var))
        Ks = self._kernel(points, self.X)
        mean = self._ybar + Ks @ self._alpha
        w = np.linalg.solve(self._chol, Ks.T)
        var = self.config.signal_var - (w * w).sum(axis=0)
        return mean, np.maximum(var, 0.0)


def gp_posterior(gp: GPState, theta) -> tuple[float, float]:
    mean, var = gp.posterior(np.atleast_2d(theta))
    return float(mean[0]), float(var[0])


def make_grid(bounds, per_dim: int = GRID_PER_DIM,
              max_points: int = GRID_MAX_POINTS) -> np.ndarray:
    """Uniform candidate grid over the box, capped in total size."""
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    d = bounds.shape[0]
    per_dim = min(per_dim, max(2, int(max_points ** (1.0 / d))))
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def beta_schedule(t: int, grid_size: int, delta: float = ACQ_DELTA) -> float:
    """Confidence scaling, nondecreasing in t."""
    return 2.0 * math.log(grid_size * t * t * math.pi**2 / (6.0 * delta))


@dataclass
class AcquisitionConfig:
    grid: np.ndarray
    delta: float = ACQ_DELTA


def acquisition_scores(gp: GPState, grid: np.ndarray, t: int,
                       delta: float = ACQ_DELTA) -> np.ndarray:
    mean, var = gp.posterior(grid)
    sigma = np.sqrt(var)
    lo, hi = float(mean.min()), float(mean.max())
    if hi > lo:
        eta = (mean - lo) / (hi - lo)
    else:
        eta = np.ones_like(mean)  # constant mean: plain confidence bound
    return mean + np.sqrt(eta) * math.sqrt(beta_schedule(t, len(grid), delta)) * sigma


def acquire(gp: GPState, cfg: AcquisitionConfig, t: int) -> tuple[int, np.ndarray]:
    """Grid point maximizing the adaptive confidence bound (lowest index on
    ties)."""
    scores = acquisition_scores(gp, cfg.grid, t, cfg.delta)
    idx = int(np.argmax(scores))
    return idx, cfg.grid[idx]


@dataclass
class HistoryEntry:
    t: int
    theta: tuple[float, ...]
    value: float              # oracle value; -inf on failure
    score: float              # acquisition score of the chosen point
    error: str | None = None


@dataclass
class OptimizationResult:
    theta: tuple[float, ...] | None
    value: float
    history: list[HistoryEntry] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.history)


def optimize_params(oracle, bounds, budget: int, seed: int = 0,
                    n_init: int = 1, per_dim: int = GRID_PER_DIM,
                    target: float = 0.0,
                    gp_config: GPConfig | None = None) -> OptimizationResult:
    """Budgeted surrogate search for the best oracle value.

    Runs seeded random probes first, then the adaptive confidence bound on
    the grid; exits early once the best value reaches the target (a
    certificate needs nothing more) or the whole grid has been probed.
    Deterministic given seed, grid, and oracle.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    grid = make_grid(bounds, per_dim=per_dim)
    cfg = AcquisitionConfig(grid=grid)
    gp = GPState(bounds, gp_config)
    rng = np.random.default_rng(seed)
    evaluated: set[int] = set()
    history: list[HistoryEntry] = []
    best_value = float("-inf")
    best_theta = None

    for t in range(1, budget + 1):
        if len(evaluated) >= len(grid):
            break
        if t <= n_init:
            idx = int(rng.integers(len(grid)))
            while idx in evaluated:
                idx = int(rng.integers(len(grid)))
            score = float("nan")
        else:
            scores = acquisition_scores(gp, grid, t)
            order = np.argsort(-scores, kind="stable")
            idx = next(int(i) for i in order if int(i) not in evaluated)
            score = float(scores[idx])
        theta = grid[idx]
        error = None
        try:
            value = float(oracle(theta))
        except ArmsynthError as exc:
            value = float("-inf")
            error = type(exc).__name__
        evaluated.add(idx)
        gp.add(theta, value if np.isfinite(value) else SURROGATE_FAILURE)
        history.append(HistoryEntry(t=t, theta=tuple(theta), value=value,
                                    score=score, error=error))
        if value > best_value or best_theta is None:
            best_value = value
            best_theta = tuple(theta)
        if best_value >= target:
            break
    return OptimizationResult(theta=best_theta, value=best_value, history=history)

"""Synthetic populations: epsilon loss vectors, EXP6 and the 1-D two-Gaussian problem."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .partition import Dataset
from .rng import SeedLike, as_generator

EXP6_CLASSES = ("Y1", "Y2", "Y3", "Y4", "Y5", "Y6")
EXP6_STEPS = 150  # grid 0, 0.1, ..., 15 on each axis


@dataclass(frozen=True)
class EpsilonConfig:
    n: int = 300
    epsilon: float = 0.1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 <= self.epsilon < 2.0 / 3.0:
            raise ValueError("epsilon must lie in [0, 2/3) so that 3*epsilon/2 is a probability")


@dataclass(frozen=True)
class Exp6Config:
    n: int = 300

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class SimpleConfig:
    n: int = 1000
    delta: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")


def epsilon_losses(cfg: EpsilonConfig, seed: SeedLike) -> tuple[np.ndarray, np.ndarray]:
    """One-zero losses of A and B; rates eps/2 vs 3eps/2 on the first half, swapped on the second."""
    rng = as_generator(seed)
    half = cfg.n // 2
    low, high = cfg.epsilon / 2.0, 1.5 * cfg.epsilon
    p_a = np.where(np.arange(cfg.n) < half, low, high)
    p_b = np.where(np.arange(cfg.n) < half, high, low)
    u = rng.random((2, cfg.n))
    return u[0] < p_a, u[1] < p_b


def f1(x):
    return x**2 - 4.0 * x + 6.0


def f2(x):
    return 4.0 * np.sin(x / 2.0) + 8.0


def f3(x):
    return -(x**2 - 108.0 * x + 236.0) / 25.0


def exp6_case_matches(x1, x2) -> np.ndarray:
    """Boolean array (..., 6): which of the six displayed cases each point satisfies."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    a = x2 - f1(x1) >= 0
    b = x2 - f2(x1) >= 0
    c = x2 - f3(x1) >= 0
    return np.stack(
        [
            a & b,
            ~a & b & c,
            a & ~b,
            ~a & ~b & c,
            b & ~c,
            ~b & ~c,
        ],
        axis=-1,
    )


def exp6_label(x1, x2):
    """Class id 0..5 (Y1..Y6): the first case, in displayed order, that holds.

    Two sign patterns satisfy two cases each (Y1/Y5 and Y3/Y6); reading the
    cases top-down resolves them. Every pattern satisfies at least one case.
    """
    m = exp6_case_matches(x1, x2)
    if not m.any(axis=-1).all():
        raise ArithmeticError("point outside every EXP6 case")
    label = np.argmax(m, axis=-1)
    return int(label) if np.ndim(label) == 0 else label.astype(np.int64)


@lru_cache(maxsize=1)
def _exp6_grid() -> tuple[np.ndarray, np.ndarray]:
    axis = np.arange(EXP6_STEPS + 1) / 10.0
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    labels = exp6_label(g1, g2)
    labels.setflags(write=False)
    return axis, labels


def exp6_population() -> Dataset:
    """The full labeled 151 x 151 grid (22,801 records)."""
    axis, labels = _exp6_grid()
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    X = np.column_stack([g1.ravel(), g2.ravel()])
    return _exp6_dataset(X, labels.ravel())


@lru_cache(maxsize=1)
def _exp6_population_cached() -> Dataset:
    return exp6_population()


def _exp6_dataset(X, y) -> Dataset:
    return Dataset(X, y, EXP6_CLASSES, ("x1", "x2"))


def exp6_sample(cfg: Exp6Config, seed: SeedLike) -> Dataset:
    """``n`` grid points drawn uniformly with replacement, labeled."""
    rng = as_generator(seed)
    axis, labels = _exp6_grid()
    ij = rng.integers(0, EXP6_STEPS + 1, size=(cfg.n, 2))
    return _exp6_dataset(axis[ij], labels[ij[:, 0], ij[:, 1]])


def simple_sample(cfg: SimpleConfig, seed: SeedLike) -> Dataset:
    """Labels Bernoulli(1/2); x ~ N(0, 1) for class 0 and N(delta, 1) for class 1."""
    rng = as_generator(seed)
    y = (rng.random(cfg.n) < 0.5).astype(np.int64)
    x = rng.standard_normal(cfg.n) + cfg.delta * y
    return Dataset(x[:, None], y, ("Y1", "Y2"), ("x",))


def simple_bayes_error(delta: float) -> float:
    return float(ndtr(-abs(delta) / 2.0))


def simple_population_error(model, delta: float, grid_step: float = 1e-3) -> float:
    """Exact error of a fitted one-feature model on the two-Gaussian population.

    The prediction is scanned on a fine grid, change points are refined by
    bisection, and each constant-prediction interval is integrated with the
    normal CDF. Intervals narrower than ``grid_step`` may be missed.
    """
    lo, hi = -10.0, 10.0 + abs(delta)
    xs = np.arange(lo, hi + grid_step, grid_step)
    pred = model.predict(xs[:, None])
    change = np.nonzero(pred[1:] != pred[:-1])[0]
    cuts = []
    for i in change:
        a, b = xs[i], xs[i + 1]
        pa = pred[i]
        for _ in range(50):
            mid = 0.5 * (a + b)
            if model.predict(np.array([[mid]]))[0] == pa:
                a = mid
            else:
                b = mid
        cuts.append(0.5 * (a + b))
    edges = np.array([-np.inf, *cuts, np.inf])
    labels = [pred[0], *(pred[i + 1] for i in change)]
    err = 0.0
    for (left, right), label in zip(zip(edges[:-1], edges[1:]), labels):
        if label == 1:
            err += 0.5 * (ndtr(right) - ndtr(left))
        else:
            err += 0.5 * (ndtr(right - delta) - ndtr(left - delta))
    return float(err)


def exp6_population_error(model) -> float:
    pop = _exp6_population_cached()
    return float(np.mean(model.predict(pop.X) != pop.y))

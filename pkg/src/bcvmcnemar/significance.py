"""Significance tests for comparing two classification algorithms.

All tests share the null hypothesis that both algorithms have the same error
rate (for McNemar-type tests: A is wrong on half of the disagreements).
Degenerate inputs never raise; they return a non-rejecting result whose
``status`` says why no statistic exists.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .contingency import AveragedTable, ContingencyTable, EffectiveTable, compression_factor
from .distributions import NORMAL, Reference, chi2, dist_isf, dist_sf, fisher_f, student_t

DEFAULT_ALPHA = 0.05

OK = "ok"
NO_DISAGREEMENT = "no_disagreement"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    test_name: str
    statistic: Optional[float]
    distribution: Reference
    p_value: float
    alpha: float
    reject: bool
    status: str = OK
    metadata: dict = field(default_factory=dict)

    @property
    def df(self):
        d = self.distribution
        if d.kind == "F":
            return [d.df1, d.df2]
        return d.df1

    @property
    def critical_value(self) -> float:
        two_sided = self.metadata.get("two_sided", False)
        return dist_isf(self.distribution, self.alpha / 2 if two_sided else self.alpha)

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "metadata": {"distribution": self.distribution.label(), "status": self.status, **self.metadata},
        }

    def verdict(self) -> str:
        if self.statistic is None:
            return f"{self.test_name}: cannot test ({self.status}); H0 not rejected"
        word = "REJECT H0" if self.reject else "do not reject H0"
        return (
            f"{self.test_name}: statistic={self.statistic:.4f} ~ {self.distribution.label()}, "
            f"p={self.p_value:.4g}, alpha={self.alpha:g} -> {word}"
        )


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")


def _upper(name: str, stat: float, dist: Reference, alpha: float, **meta) -> TestResult:
    _check_alpha(alpha)
    return TestResult(
        name, float(stat), dist, dist_sf(dist, stat), alpha, bool(stat > dist_isf(dist, alpha)), OK, meta
    )


def _two_sided(name: str, stat: float, dist: Reference, alpha: float, **meta) -> TestResult:
    _check_alpha(alpha)
    p = min(1.0, 2.0 * dist_sf(dist, abs(stat)))
    reject = abs(stat) > dist_isf(dist, alpha / 2)
    return TestResult(name, float(stat), dist, p, alpha, bool(reject), OK, {"two_sided": True, **meta})


def _untestable(name: str, dist: Reference, alpha: float, status: str, **meta) -> TestResult:
    _check_alpha(alpha)
    return TestResult(name, None, dist, 1.0, alpha, False, status, meta)


# McNemar-type statistics are evaluated in exact rational arithmetic from their
# float inputs and rounded once: near |n01 - n10| = 1 the float expression
# loses most of its significant digits to cancellation.


def _round(q: Fraction) -> float:
    try:
        return float(q)
    except OverflowError:
        return math.inf


def _mcnemar_term(n01, n10) -> float:
    a, b = Fraction(n01), Fraction(n10)
    return _round((abs(a - b) - 1) ** 2 / (a + b))


def mcnemar_ho(c: ContingencyTable, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Continuity-corrected McNemar statistic on a single hold-out table."""
    name = "mcnemar_ho"
    if c.n01 + c.n10 == 0:
        return _untestable(name, chi2(1), alpha, NO_DISAGREEMENT, family="mcnemar")
    return _upper(name, _mcnemar_term(c.n01, c.n10), chi2(1), alpha, family="mcnemar")


def mcnemar_naive_kfold(tables: Sequence[ContingencyTable], alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Sum of per-fold McNemar statistics against chi2(K).

    Folds without disagreements contribute no statistic; they are dropped and
    the degrees of freedom shrink accordingly.
    """
    name = "mcnemar_naive_kfold"
    if len(tables) < 2:
        raise ValueError("naive K-fold McNemar needs at least two folds")
    used = [t for t in tables if t.n01 + t.n10 > 0]
    meta = {"family": "mcnemar", "folds": len(tables), "folds_skipped": len(tables) - len(used)}
    if not used:
        return _untestable(name, chi2(len(tables)), alpha, NO_DISAGREEMENT, **meta)
    stat = sum(_mcnemar_term(t.n01, t.n10) for t in used)
    return _upper(name, stat, chi2(len(used)), alpha, **meta)


def mcnemar_effective(eff: EffectiveTable, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """McNemar statistic evaluated directly on the (real-valued) effective table."""
    name = "mcnemar_effective"
    if eff.n01 + eff.n10 <= 0:
        return _untestable(name, chi2(1), alpha, NO_DISAGREEMENT, family="mcnemar")
    _, n01, n10, _ = eff.exact_cells()
    return _upper(name, _mcnemar_term(n01, n10), chi2(1), alpha, family="mcnemar", t=eff.t)


def bcv_statistic(avg: AveragedTable, t: float) -> float:
    """t (|n01 - n10| - 1/t)^2 / (n01 + n10) on the averaged table."""
    a, b, tt = Fraction(avg.n01), Fraction(avg.n10), Fraction(t)
    return _round(tt * (abs(a - b) - 1 / tt) ** 2 / (a + b))


def mcnemar_bcv_general(
    avg: AveragedTable, rho1: float, rho2: float, alpha: float = DEFAULT_ALPHA
) -> TestResult:
    name = "mcnemar_bcv_general"
    t = compression_factor(rho1, rho2)
    mass = avg.n01 + avg.n10
    meta = {"family": "mcnemar", "t": t, "rho1": rho1, "rho2": rho2, "low_support": bool(mass < 1)}
    if mass <= 0:
        return _untestable(name, chi2(1), alpha, NO_DISAGREEMENT, **meta)
    return _upper(name, bcv_statistic(avg, t), chi2(1), alpha, **meta)


def mcnemar_bcv_5x2(avg: AveragedTable, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """The calibrated 5x2 BCV McNemar test (rho1 = rho2 = 1/2, t = 20/11)."""
    name = "mcnemar_bcv_5x2"
    mass = avg.n01 + avg.n10
    meta = {"family": "mcnemar", "t": 20.0 / 11.0, "low_support": bool(mass < 1)}
    if mass <= 0:
        return _untestable(name, chi2(1), alpha, NO_DISAGREEMENT, **meta)
    a, b = Fraction(avg.n01), Fraction(avg.n10)
    stat = _round(20 * (abs(a - b) - Fraction(11, 20)) ** 2 / (11 * (a + b)))
    return _upper(name, stat, chi2(1), alpha, **meta)


def _as_5x2(diffs) -> np.ndarray:
    d = np.asarray(diffs, dtype=float)
    if d.shape != (5, 2):
        raise ValueError(f"expected a 5x2 array of fold differences, got shape {d.shape}")
    return d


def _pair_variances(d: np.ndarray) -> np.ndarray:
    mean = d.mean(axis=1, keepdims=True)
    return ((d - mean) ** 2).sum(axis=1)


def paired_t_5x2cv(diffs, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Dietterich's 5x2 CV paired t-test; ``diffs[j, k]`` = err_A - err_B on fold k of replication j."""
    name = "paired_t_5x2cv"
    d = _as_5x2(diffs)
    s2 = _pair_variances(d)
    if np.all(d[:, 0] == d[:, 1]):
        return _untestable(name, student_t(5), alpha, DEGENERATE, family="baseline", two_sided=True)
    stat = d[0, 0] / math.sqrt(s2.mean())
    return _two_sided(name, stat, student_t(5), alpha, family="baseline")


def paired_t_kfold(diffs, alpha: float = DEFAULT_ALPHA) -> TestResult:
    name = "paired_t_kfold"
    d = np.asarray(diffs, dtype=float).ravel()
    K = d.size
    if K < 2:
        raise ValueError("paired t over folds needs K >= 2")
    if np.all(d == d[0]):
        return _untestable(name, student_t(K - 1), alpha, DEGENERATE, family="baseline", two_sided=True)
    stat = d.mean() / (d.std(ddof=1) / math.sqrt(K))
    return _two_sided(name, stat, student_t(K - 1), alpha, family="baseline")


def combined_f_5x2cv(diffs, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Alpaydin's combined 5x2 CV F-test against F(10, 5)."""
    name = "combined_f_5x2cv"
    d = _as_5x2(diffs)
    denom = 2.0 * _pair_variances(d).sum()
    if np.all(d[:, 0] == d[:, 1]):
        return _untestable(name, fisher_f(10, 5), alpha, DEGENERATE, family="baseline")
    return _upper(name, float((d**2).sum() / denom), fisher_f(10, 5), alpha, family="baseline")


def proportional_z(err_a: int, err_b: int, n2: int, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Two-proportion z-test on error counts from one shared validation set."""
    name = "proportional_z"
    if n2 < 1:
        raise ValueError("validation set must be non-empty")
    if not (0 <= err_a <= n2 and 0 <= err_b <= n2):
        raise ValueError("error counts must lie in [0, n2]")
    pa, pb = err_a / n2, err_b / n2
    p = (pa + pb) / 2.0
    if p <= 0.0 or p >= 1.0:
        return _untestable(name, NORMAL, alpha, DEGENERATE, family="baseline", two_sided=True)
    stat = (pa - pb) / math.sqrt(2.0 * p * (1.0 - p) / n2)
    return _two_sided(name, stat, NORMAL, alpha, family="baseline")


TEST_NAMES = (
    "mcnemar_ho",
    "mcnemar_naive_kfold",
    "mcnemar_bcv_5x2",
    "mcnemar_bcv_general",
    "paired_t_5x2cv",
    "paired_t_kfold",
    "combined_f_5x2cv",
    "proportional_z",
)


def validate_test_names(names) -> tuple[str, ...]:
    names = tuple(names)
    unknown = [n for n in names if n not in TEST_NAMES]
    if unknown:
        raise ValueError(f"unknown test name(s): {', '.join(unknown)}; choose from {', '.join(TEST_NAMES)}")
    if not names:
        raise ValueError("at least one test is required")
    return names

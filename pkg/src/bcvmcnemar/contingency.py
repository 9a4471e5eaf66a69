"""Joint-correctness tables of two classifiers and what is estimated from them.

Cell naming follows the usual convention for comparing algorithms A and B:

    n00  both wrong
    n01  A wrong, B right
    n10  A right, B wrong
    n11  both right
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

CELLS = ("n00", "n01", "n10", "n11")


def _ratio(num: float, den: float) -> Optional[float]:
    return None if den == 0 else num / den


@dataclass(frozen=True)
class Estimators:
    """Plug-in estimates of e, r, q_a, q_b. ``None`` marks a zero denominator."""

    E: float
    R: Optional[float]
    Qa: Optional[float]
    Qb: Optional[float]

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(k for k in ("R", "Qa", "Qb") if getattr(self, k) is None)


class _Cells:
    n00: float
    n01: float
    n10: float
    n11: float

    @property
    def cells(self) -> tuple:
        return (self.n00, self.n01, self.n10, self.n11)

    @property
    def total(self) -> float:
        return self.n00 + self.n01 + self.n10 + self.n11

    @property
    def discordant(self) -> float:
        return self.n01 + self.n10

    def estimators(self) -> Estimators:
        return Estimators(
            E=self.discordant / self.total,
            R=_ratio(self.n01, self.n01 + self.n10),
            Qa=_ratio(self.n01, self.n01 + self.n11),
            Qb=_ratio(self.n00, self.n10 + self.n00),
        )

    def swapped(self):
        """The same table with the roles of A and B exchanged."""
        return type(self)(**self._swapped_kwargs())

    def _swapped_kwargs(self) -> dict:
        return {"n00": self.n00, "n01": self.n10, "n10": self.n01, "n11": self.n11}

    def to_dict(self) -> dict:
        return dict(zip(CELLS, self.cells))


@dataclass(frozen=True)
class ContingencyTable(_Cells):
    n00: int
    n01: int
    n10: int
    n11: int

    def __post_init__(self):
        for name in CELLS:
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.total < 1:
            raise ValueError("a contingency table needs at least one record")

    @property
    def n2(self) -> int:
        return self.total

    @classmethod
    def from_dict(cls, d: dict) -> "ContingencyTable":
        return cls(*(d[k] for k in CELLS))

    @classmethod
    def from_losses(cls, loss_a, loss_b) -> "ContingencyTable":
        """Build from one-zero loss vectors (1 = misclassified)."""
        a = np.asarray(loss_a, dtype=bool)
        b = np.asarray(loss_b, dtype=bool)
        if a.shape != b.shape:
            raise ValueError("loss vectors differ in length")
        return cls(
            int(np.count_nonzero(a & b)),
            int(np.count_nonzero(a & ~b)),
            int(np.count_nonzero(~a & b)),
            int(np.count_nonzero(~a & ~b)),
        )


@dataclass(frozen=True)
class AveragedTable(_Cells):
    n00: float
    n01: float
    n10: float
    n11: float

    def __post_init__(self):
        for name in CELLS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "AveragedTable":
        return cls(*(float(d[k]) for k in CELLS))


@dataclass(frozen=True)
class EffectiveTable(_Cells):
    """Real-valued virtual table ``t * averaged`` standing in for ten CV tables."""

    n00: float
    n01: float
    n10: float
    n11: float
    n_e: float
    t: float
    # exact products t * averaged cell; the float cells above are their roundings
    exact: Optional[tuple] = field(default=None, compare=False, repr=False)

    def exact_cells(self) -> tuple:
        if self.exact is not None:
            return self.exact
        return tuple(Fraction(v) for v in self.cells)

    def estimators(self) -> Estimators:
        est = super().estimators()
        return Estimators(self.discordant / self.n_e, est.R, est.Qa, est.Qb)

    def _swapped_kwargs(self) -> dict:
        kw = {**super()._swapped_kwargs(), "n_e": self.n_e, "t": self.t}
        if self.exact is not None:
            e00, e01, e10, e11 = self.exact
            kw["exact"] = (e00, e10, e01, e11)
        return kw


def table_from_predictions(y_true, yhat_a, yhat_b) -> ContingencyTable:
    y = np.asarray(y_true)
    a = np.asarray(yhat_a)
    b = np.asarray(yhat_b)
    if not (y.shape == a.shape == b.shape):
        raise ValueError(f"length mismatch: {y.shape}, {a.shape}, {b.shape}")
    if y.size == 0:
        raise ValueError("need at least one record")
    return ContingencyTable.from_losses(a != y, b != y)


def estimators(c: _Cells) -> Estimators:
    return c.estimators()


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float

    def mode(self) -> Optional[float]:
        """Posterior mode; ``None`` when the density has no unique maximum."""
        a, b = self.alpha, self.beta
        if a >= 1 and b >= 1:
            if a + b == 2:
                return None  # uniform
            return (a - 1) / (a + b - 2)
        if a < 1 <= b:
            return 0.0
        if b < 1 <= a:
            return 1.0
        return None

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class BetaPosteriors:
    e: Beta
    r: Beta
    qa: Beta
    qb: Beta
    lam: float

    def modes(self) -> dict[str, Optional[float]]:
        return {"e": self.e.mode(), "r": self.r.mode(), "qa": self.qa.mode(), "qb": self.qb.mode()}


def posterior_params(c: _Cells, lam: float = 1.0) -> BetaPosteriors:
    """Conjugate Beta(lam, lam) prior updated by the table's counts."""
    if not lam > 0:
        raise ValueError("prior parameter lambda must be positive")
    n00, n01, n10, n11 = c.cells
    return BetaPosteriors(
        e=Beta(n01 + n10 + lam, n00 + n11 + lam),
        r=Beta(n01 + lam, n10 + lam),
        qa=Beta(n01 + lam, n11 + lam),
        qb=Beta(n00 + lam, n10 + lam),
        lam=lam,
    )


def average_table(tables: Sequence[ContingencyTable]) -> AveragedTable:
    """Cell-wise mean of the ten tables of one 5x2 BCV run."""
    if len(tables) != 10:
        raise ValueError(f"expected 10 tables from a 5x2 BCV run, got {len(tables)}")
    m = np.array([t.cells for t in tables], dtype=float).mean(axis=0)
    return AveragedTable(*map(float, m))


def compression_factor(rho1: float, rho2: float) -> float:
    denom = 1.0 + rho1 + 8.0 * rho2
    if not denom > 0:
        raise ValueError(f"1 + rho1 + 8 rho2 must be positive, got {denom}")
    return 10.0 / denom


def effective_table(avg: AveragedTable, rho1: float, rho2: float, n: Optional[int] = None) -> EffectiveTable:
    """Scale the averaged table by t = 10 / (1 + rho1 + 8 rho2).

    ``n`` is the full data set size; it defaults to twice the averaged total.
    """
    t = compression_factor(rho1, rho2)
    if n is None:
        n = 2.0 * avg.total
    n_e = 5.0 * n / (1.0 + rho1 + 8.0 * rho2)
    exact = tuple(Fraction(t) * Fraction(v) for v in avg.cells)
    return EffectiveTable(*(float(v) for v in exact), n_e=n_e, t=t, exact=exact)


def variance_e5x2(e: float, n: int, rho1: float, rho2: float) -> float:
    """Variance of the averaged disagreement estimator over a 5x2 BCV."""
    return e * (1.0 - e) * (1.0 + rho1 + 8.0 * rho2) / (5.0 * n)


class UndefinedRho(ValueError):
    """Raised when correlations cannot be estimated (no variance, too few reps)."""


@dataclass(frozen=True)
class RhoEstimate:
    rho1: float
    rho2: float
    sigma2: float
    e_mean: float
    reps: int

    @property
    def within_theoretical_bound(self) -> bool:
        return self.rho2 < (1.0 + self.rho1) / 2.0

    @property
    def within_practical_bounds(self) -> bool:
        return self.rho1 <= 0.5 and 0.0 <= self.rho2 <= 0.5


MIN_RHO_REPS = 30


def estimate_rho(e_values) -> RhoEstimate:
    """Correlation coefficients from an (R, 5, 2) array of hold-out estimates.

    sigma^2 pools the ten per-position sample variances; rho1 averages the five
    within-replication covariances, rho2 the forty across-replication ones.
    Sample covariances use divisor R - 1.
    """
    e = np.asarray(e_values, dtype=float)
    if e.ndim != 3 or e.shape[1:] != (5, 2):
        raise ValueError(f"expected shape (R, 5, 2), got {e.shape}")
    R = e.shape[0]
    if R < MIN_RHO_REPS:
        raise UndefinedRho(f"need at least {MIN_RHO_REPS} replications, got {R}")
    flat = e.reshape(R, 10)
    cov = np.cov(flat, rowvar=False, ddof=1)
    sigma2 = float(np.mean(np.diag(cov)))
    scale = max(1.0, float(np.abs(flat).max()))
    if not sigma2 > (1e-12 * scale) ** 2:  # rounding noise of a constant column
        raise UndefinedRho("hold-out estimates have zero variance")
    group = np.arange(10) // 2
    same = group[:, None] == group[None, :]
    off = ~np.eye(10, dtype=bool)
    rho1 = float(cov[same & off].mean() / sigma2)
    rho2 = float(cov[~same].mean() / sigma2)
    return RhoEstimate(rho1, rho2, sigma2, float(flat.mean()), R)


def write_rho_csv(
    rows: Iterable[tuple[str, str, str, Optional[RhoEstimate]]], path: Union[str, Path, IO[str]]
) -> None:
    """One row per (dataset, algorithm A, algorithm B); blanks for undefined estimates."""
    if hasattr(path, "write"):
        _rho_rows(path, rows)
    else:
        with open(path, "w", newline="") as fh:
            _rho_rows(fh, rows)


def _rho_rows(fh, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["dataset", "alg_a", "alg_b", "rho1", "rho2"])
    for dataset, a, b, est in rows:
        if est is None:
            w.writerow([dataset, a, b, "", ""])
        else:
            w.writerow([dataset, a, b, f"{est.rho1:.6f}", f"{est.rho2:.6f}"])

"""Upper-tail probabilities and critical values for chi2, t, F and normal."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from scipy import special

KINDS = ("chi2", "t", "F", "normal")


@dataclass(frozen=True)
class Reference:
    kind: str
    df1: Optional[float] = None
    df2: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution {self.kind!r}")
        need = {"chi2": 1, "t": 1, "F": 2, "normal": 0}[self.kind]
        dfs = [d for d in (self.df1, self.df2) if d is not None]
        if len(dfs) != need or any(not d > 0 for d in dfs):
            raise ValueError(f"{self.kind} needs {need} positive degree(s) of freedom, got {dfs}")

    def sf(self, x: float) -> float:
        return dist_sf(self, x)

    def isf(self, p: float) -> float:
        return dist_isf(self, p)

    def label(self) -> str:
        if self.kind == "normal":
            return "normal"
        if self.kind == "F":
            return f"F({self.df1:g},{self.df2:g})"
        return f"{self.kind}({self.df1:g})"


def chi2(df: float) -> Reference:
    return Reference("chi2", df)


def student_t(df: float) -> Reference:
    return Reference("t", df)


def fisher_f(df1: float, df2: float) -> Reference:
    return Reference("F", df1, df2)


NORMAL = Reference("normal")


def dist_sf(dist: Reference, x: float) -> float:
    """P(X > x)."""
    if dist.kind == "chi2":
        return float(special.chdtrc(dist.df1, x)) if x > 0 else 1.0
    if dist.kind == "t":
        return float(special.stdtr(dist.df1, -x))
    if dist.kind == "F":
        return float(special.fdtrc(dist.df1, dist.df2, x)) if x > 0 else 1.0
    return float(special.ndtr(-x))


def dist_isf(dist: Reference, p: float) -> float:
    """Upper-p quantile: the x with P(X > x) = p."""
    if not 0.0 < p < 1.0:
        raise ValueError("tail probability must lie in (0, 1)")
    if dist.kind == "chi2":
        return float(special.chdtri(dist.df1, p))
    if dist.kind == "t":
        return float(special.stdtrit(dist.df1, 1.0 - p))
    if dist.kind == "F":
        return float(special.fdtri(dist.df1, dist.df2, 1.0 - p))
    return float(special.ndtri(1.0 - p))

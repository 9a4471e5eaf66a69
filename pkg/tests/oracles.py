"""Independent reference computations used to check the package.

None of these import the code under test. Tail probabilities come from
mpmath at high precision, ratios from exact rational arithmetic, and the
partition structure from a literal set enumeration of the block layout.
"""

from fractions import Fraction
from itertools import combinations

import mpmath as mp

mp.mp.dps = 40

# training blocks of each regularized two-fold split, 1-based as in the layout table
TABLE_III = (
    {1, 2, 3, 4},
    {1, 3, 5, 7},
    {1, 2, 5, 6},
    {1, 4, 5, 8},
    {1, 3, 6, 8},
)


def layout_overlaps(block_size: int) -> list[int]:
    """Pairwise training overlaps when every block holds ``block_size`` records."""
    return [len(a & b) * block_size for a, b in combinations(TABLE_III, 2)]


def chi2_sf(x: float, df: float) -> float:
    if x <= 0:
        return 1.0
    return float(mp.gammainc(mp.mpf(df) / 2, mp.mpf(x) / 2, mp.inf, regularized=True))


def normal_sf(x: float) -> float:
    return float(mp.erfc(mp.mpf(x) / mp.sqrt(2)) / 2)


def t_sf(x: float, df: float) -> float:
    """Upper tail of Student t by quadrature of its density."""
    nu = mp.mpf(df)
    c = mp.gamma((nu + 1) / 2) / (mp.sqrt(nu * mp.pi) * mp.gamma(nu / 2))
    pdf = lambda u: c * (1 + u * u / nu) ** (-(nu + 1) / 2)
    return float(mp.quad(pdf, [x, x + 10, mp.inf]))


def f_sf(x: float, d1: float, d2: float) -> float:
    """Upper tail of Fisher F by quadrature of its density."""
    if x <= 0:
        return 1.0
    a, b = mp.mpf(d1), mp.mpf(d2)
    c = (a / b) ** (a / 2) / mp.beta(a / 2, b / 2)
    pdf = lambda u: c * u ** (a / 2 - 1) * (1 + a * u / b) ** (-(a + b) / 2)
    return float(mp.quad(pdf, [x, x + 10, x + 1000, mp.inf]))


def exact_estimators(n00: int, n01: int, n10: int, n11: int) -> dict:
    """Table estimators as exact fractions (None for empty denominators)."""
    n2 = n00 + n01 + n10 + n11
    ratio = lambda a, b: None if b == 0 else Fraction(a, b)
    return {
        "E": Fraction(n01 + n10, n2),
        "R": ratio(n01, n01 + n10),
        "Qa": ratio(n01, n01 + n11),
        "Qb": ratio(n00, n10 + n00),
    }


def exact_beta_mode(alpha: Fraction, beta: Fraction) -> Fraction:
    return (alpha - 1) / (alpha + beta - 2)


def exact_mcnemar(n01, n10) -> Fraction:
    n01, n10 = Fraction(n01), Fraction(n10)
    return (abs(n01 - n10) - 1) ** 2 / (n01 + n10)


def exact_bcv(n01, n10, t) -> Fraction:
    n01, n10, t = Fraction(n01), Fraction(n10), Fraction(t)
    return t * (abs(n01 - n10) - 1 / t) ** 2 / (n01 + n10)


def dietterich_null_rate(alpha: float = 0.05) -> float:
    """Exact rejection probability of the 5x2cv t statistic for iid N(0,1) differences.

    With u, v independent standard normals for the first replication's sum and
    difference, d11 = (u + v)/sqrt(2) and s_1^2 = v^2; the other four s_i^2
    sum to a chi2(4) variable W. Integrate P(|d11| > c sqrt((v^2 + W)/5)) over
    v and W, where c is the two-sided t(5) critical value.
    """
    c = mp.findroot(lambda x: 2 * t_sf(x, 5) - alpha, 2.57)
    phi = lambda x: mp.exp(-x * x / 2) / mp.sqrt(2 * mp.pi)
    tail = lambda x: mp.erfc(x / mp.sqrt(2)) / 2
    chi4 = lambda w: w * mp.exp(-w / 2) / 4

    def given_v(v):
        def inner(w):
            k = mp.sqrt(2) * c * mp.sqrt((v * v + w) / 5)
            return chi4(w) * (tail(k - v) + tail(k + v))
        return phi(v) * mp.quad(inner, [0, 10, 40, mp.inf])

    mp.mp.dps = 15
    try:
        return float(mp.quad(given_v, [-mp.inf, -3, 0, 3, mp.inf]))
    finally:
        mp.mp.dps = 40

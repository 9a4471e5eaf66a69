import math

import numpy as np
import pytest
from scipy.stats import norm

from bcvmcnemar.classifiers import fit
from bcvmcnemar.datagen import (
    EXP6_CLASSES,
    EpsilonConfig,
    Exp6Config,
    SimpleConfig,
    epsilon_losses,
    exp6_case_matches,
    exp6_label,
    exp6_population,
    exp6_population_error,
    exp6_sample,
    f1,
    f2,
    f3,
    simple_bayes_error,
    simple_population_error,
    simple_sample,
)

# class frequencies of the 22,801-point grid, by direct enumeration
GRID_COUNTS = [2250, 67, 3284, 819, 7794, 8587]
GRID_DOUBLE_MATCHES = 166


class TestEpsilon:
    def test_zero(self):
        a, b = epsilon_losses(EpsilonConfig(300, 0.0), 1)
        assert not a.any() and not b.any()

    def test_rates(self):
        rng = np.random.default_rng(0)
        draws = [epsilon_losses(EpsilonConfig(300, 0.1), rng) for _ in range(2000)]
        a = np.array([d[0] for d in draws], dtype=float)
        b = np.array([d[1] for d in draws], dtype=float)
        assert a.mean() == pytest.approx(0.1, abs=0.003)
        assert b.mean() == pytest.approx(0.1, abs=0.003)
        assert a[:, :150].mean() == pytest.approx(0.05, abs=0.003)
        assert a[:, 150:].mean() == pytest.approx(0.15, abs=0.004)
        assert b[:, :150].mean() == pytest.approx(0.15, abs=0.004)

    def test_deterministic(self):
        x = epsilon_losses(EpsilonConfig(50, 0.2), 9)
        y = epsilon_losses(EpsilonConfig(50, 0.2), 9)
        assert all(np.array_equal(p, q) for p, q in zip(x, y))

    @pytest.mark.parametrize("eps", [-0.1, 0.7])
    def test_invalid(self, eps):
        with pytest.raises(ValueError):
            EpsilonConfig(300, eps)


class TestExp6Labels:
    def test_boundaries_at_zero(self):
        assert f1(0) == 6 and f2(0) == 8 and f3(0) == pytest.approx(-9.44)

    def test_top_left(self):
        assert EXP6_CLASSES[exp6_label(0, 15)] == "Y1"

    def test_bottom(self):
        assert f1(2) == 2 and f2(2) == pytest.approx(4 * math.sin(1) + 8)
        assert f3(2) == pytest.approx(-0.96)
        assert EXP6_CLASSES[exp6_label(2, 0)] == "Y4"

    def test_deterministic(self):
        assert exp6_label(7.3, 4.1) == exp6_label(7.3, 4.1)

    def test_grid_enumeration(self):
        pop = exp6_population()
        assert pop.n == 22801
        assert np.bincount(pop.y, minlength=6).tolist() == GRID_COUNTS
        m = exp6_case_matches(pop.X[:, 0], pop.X[:, 1])
        assert (m.sum(axis=1) == 0).sum() == 0
        assert (m.sum(axis=1) >= 2).sum() == GRID_DOUBLE_MATCHES

    def test_population_corners_and_labels(self):
        pop = exp6_population()
        pts = {tuple(p) for p in np.round(pop.X[[0, -1]], 6)}
        assert pts == {(0.0, 0.0), (15.0, 15.0)}
        rng = np.random.default_rng(0)
        for i in rng.choice(pop.n, 200, replace=False):
            assert exp6_label(*pop.X[i]) == pop.y[i]

    def test_sample_on_grid(self):
        d = exp6_sample(Exp6Config(300), 5)
        assert np.allclose(d.X * 10, np.round(d.X * 10))
        assert d.X.min() >= 0 and d.X.max() <= 15

    def test_sample_class_frequencies(self):
        d = exp6_sample(Exp6Config(20000), 11)
        p = np.array(GRID_COUNTS) / 22801
        got = np.bincount(d.y, minlength=6) / 20000
        assert np.all(np.abs(got - p) <= 4 * np.sqrt(p * (1 - p) / 20000))


class TestSimple:
    def test_bayes_error(self):
        assert simple_bayes_error(0.0) == 0.5
        assert simple_bayes_error(1.0) == pytest.approx(0.3085, abs=1e-4)

    def test_class_balance_and_shift(self):
        d = simple_sample(SimpleConfig(20000, 0.8), 3)
        x = d.X[:, 0]
        assert d.y.mean() == pytest.approx(0.5, abs=0.015)
        assert x[d.y == 1].mean() - x[d.y == 0].mean() == pytest.approx(0.8, abs=0.05)

    def test_population_error_majority(self):
        m = fit("majority", simple_sample(SimpleConfig(100, 0.6), 1))
        assert simple_population_error(m, 0.6) == pytest.approx(0.5)

    @pytest.mark.parametrize("spec", ["tree", "knn", "logreg"])
    def test_population_error_two_routes(self, spec):
        """Change-point integration agrees with a large independent test sample."""
        delta = 1.0
        m = fit(spec, simple_sample(SimpleConfig(300, delta), 2))
        exact = simple_population_error(m, delta)
        big = simple_sample(SimpleConfig(400_000, delta), 99)
        mc = np.mean(m.predict(big.X) != big.y)
        assert exact == pytest.approx(mc, abs=4 * math.sqrt(0.25 / 400_000))

    def test_threshold_rule_closed_form(self):
        """A mean classifier with centroids 0 and delta errs at Phi(-delta/2) exactly."""
        class Fixed:
            def predict(self, X):
                return (np.asarray(X).ravel() > 0.35).astype(int)

        err = simple_population_error(Fixed(), 0.7)
        assert err == pytest.approx(norm.cdf(-0.35), abs=1e-9)


class TestExp6Oracle:
    def test_matches_direct_count(self):
        m = fit("tree", exp6_sample(Exp6Config(300), 4))
        pop = exp6_population()
        assert exp6_population_error(m) == np.mean(m.predict(pop.X) != pop.y)

import json
import logging
import math

import numpy as np
import pytest

from bcvmcnemar.partition import Dataset
from bcvmcnemar.rng import child_streams, replication_seed
from bcvmcnemar.simharness import (
    CalibrationError,
    LossSource,
    RhoSource,
    ScenarioConfig,
    TrueErrorCurve,
    builtin_source,
    calibrate_hyperparameter,
    compare_on_dataset,
    e_value_array,
    rho_sweep,
    run_replication,
    run_scenario,
    true_error_curve,
)

MCNEMAR = ("mcnemar_ho", "mcnemar_naive_kfold", "mcnemar_bcv_5x2", "mcnemar_bcv_general")


def eps_cfg(**kw):
    base = dict(generator="epsilon", n=300, tests=MCNEMAR + ("paired_t_5x2cv",), replications=100, master_seed=3)
    base.update(kw)
    return ScenarioConfig(**base)


class TestSeeding:
    def test_replication_streams_repeatable(self):
        a = child_streams(replication_seed(5, 17), ("x", "y"))
        b = child_streams(replication_seed(5, 17), ("x", "y"))
        assert a["x"].random() == b["x"].random() and a["y"].random() == b["y"].random()

    def test_streams_distinct(self):
        s = child_streams(replication_seed(5, 17), ("x", "y"))
        t = child_streams(replication_seed(5, 18), ("x", "y"))
        vals = {s["x"].random(), s["y"].random(), t["x"].random(), t["y"].random()}
        assert len(vals) == 4


class TestConfig:
    def test_unknown_test(self):
        with pytest.raises(ValueError):
            eps_cfg(tests=("mcnemar_ho", "rho_paired_t"))

    def test_epsilon_takes_no_algorithms(self):
        with pytest.raises(ValueError):
            eps_cfg(algorithms=("majority", "mean"))

    def test_models_need_algorithms(self):
        with pytest.raises(ValueError):
            ScenarioConfig(generator="simple", n=100, tests=("mcnemar_ho",))

    def test_lambda_needs_calibration(self):
        with pytest.raises(ValueError):
            ScenarioConfig.from_dict(dict(generator="exp6", n=300, algorithms=["tree", "fnn_weighted"],
                                          tests=["mcnemar_ho"], sweep={"lambda": [0, 1]}))

    def test_sweep_domain_checked(self):
        with pytest.raises(ValueError):
            ScenarioConfig.from_dict(dict(generator="exp6", n=300, algorithms=["tree", "fnn_weighted"],
                                          tests=["mcnemar_ho"], sweep={"omega": [0.5, 2.0]}))

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            ScenarioConfig.from_dict(dict(generator="epsilon", n=300, tests=["mcnemar_ho"], colour="red"))

    def test_roundtrip_and_hash(self):
        cfg = ScenarioConfig.from_dict(dict(generator="simple", n=200, algorithms=["majority", "logreg"],
                                            tests=["mcnemar_bcv_5x2"], sweep={"delta": [0, 0.5]}))
        again = ScenarioConfig.from_dict({k: v for k, v in cfg.to_dict().items()})
        assert again == cfg and again.config_hash() == cfg.config_hash()


class TestReplication:
    def test_deterministic(self):
        cfg = eps_cfg()
        a = run_replication(cfg, None, 7)
        b = run_replication(cfg, None, 7)
        assert [r.to_dict() for r in a.values()] == [r.to_dict() for r in b.values()]

    def test_models_deterministic(self):
        cfg = ScenarioConfig(generator="simple", n=120, algorithms=("mean", "knn"),
                             tests=("mcnemar_ho", "mcnemar_bcv_5x2", "paired_t_kfold"), replications=100)
        a = run_replication(cfg, None, 2)
        b = run_replication(cfg, None, 2)
        assert [r.statistic for r in a.values()] == [r.statistic for r in b.values()]

    def test_no_disagreement_never_rejects(self):
        res = run_replication(eps_cfg(epsilon=0.0), None, 0)
        for name in MCNEMAR:
            assert res[name].statistic is None and not res[name].reject

    def test_each_test_uses_its_scheme(self):
        res = run_replication(eps_cfg(tests=("mcnemar_ho", "mcnemar_naive_kfold", "mcnemar_bcv_5x2")), None, 1)
        assert res["mcnemar_naive_kfold"].metadata["folds"] == 10
        assert res["mcnemar_bcv_5x2"].metadata["t"] == pytest.approx(20 / 11)

    def test_loss_source_splits_vectors(self):
        src = LossSource([1, 0, 1, 0], [0, 0, 1, 1])
        from bcvmcnemar.partition import SplitPair
        la, lb = src.fold(SplitPair(np.array([0, 1]), np.array([2, 3])))
        assert la.tolist() == [True, False] and lb.tolist() == [True, True]


class TestScenario:
    def test_rate_definition(self):
        rep = run_scenario(eps_cfg())
        for row in rep.rows:
            assert row.rejection_rate == row.rejections / row.replications
            assert row.se == pytest.approx(math.sqrt(row.rejection_rate * (1 - row.rejection_rate) / 100))

    def test_worker_count_irrelevant(self):
        cfg = eps_cfg(replications=40)
        assert run_scenario(cfg, workers=1).to_csv() == run_scenario(cfg, workers=2).to_csv()

    def test_json_provenance(self):
        doc = json.loads(run_scenario(eps_cfg(replications=20)).to_json())
        assert doc["provenance"]["master_seed"] == 3
        assert len(doc["provenance"]["config_hash"]) == 16
        assert "runtime" not in json.dumps(doc)

    def test_h0_point_equals_type_one_run(self):
        """The left end of a power curve is the type I error run itself."""
        base = dict(generator="simple", n=200, algorithms=["majority", "logreg"],
                    tests=["mcnemar_bcv_5x2"], replications=30, master_seed=9)
        swept = run_scenario(ScenarioConfig.from_dict({**base, "sweep": {"delta": [0.0, 0.5]}}))
        single = run_scenario(ScenarioConfig.from_dict({**base, "delta": 0.0}))
        assert swept.row("mcnemar_bcv_5x2", 0.0).rejections == single.rows[0].rejections

    def test_type_one_control_epsilon(self):
        rep = run_scenario(eps_cfg(replications=300, master_seed=21))
        bound = 0.05 + 3 * math.sqrt(0.05 * 0.95 / 300)
        for name in MCNEMAR:
            assert rep.rate(name) <= bound


class TestTrueError:
    def test_majority_flat(self):
        cfg = ScenarioConfig.from_dict(dict(generator="simple", n=200, algorithms=["majority", "logreg"],
                                            tests=["mcnemar_ho"], replications=100,
                                            sweep={"delta": [0.0, 0.5, 1.0]}))
        curve = true_error_curve(cfg, reps=20)
        assert np.allclose(curve.mu_a, 0.5)
        assert curve.mu_b[0] == pytest.approx(0.5, abs=0.02)
        assert curve.mu_b[2] < 0.33

    def test_epsilon_analytic(self):
        cfg = eps_cfg(sweep_param="epsilon", sweep_values=(0.05, 0.1))
        curve = true_error_curve(cfg)
        assert curve.mu_a.tolist() == [0.05, 0.1] and curve.mu_b.tolist() == [0.05, 0.1]

    def test_fnn_improves_with_omega(self):
        cfg = ScenarioConfig.from_dict(dict(generator="exp6", n=300, algorithms=["tree", "fnn_weighted"],
                                            tests=["mcnemar_ho"], replications=100,
                                            sweep={"omega": [0.1, 1.0]}))
        curve = true_error_curve(cfg, reps=5)
        assert curve.mu_b[0] > curve.mu_b[1]
        assert curve.mu_a[0] == curve.mu_a[1]


def synthetic_curve():
    values = (0.1, 0.2, 0.5, 1.0)
    mu_b = np.array([0.20, 0.12, 0.08, 0.06])
    return TrueErrorCurve("omega", values, np.full(4, 0.10), mu_b, np.zeros(4), np.zeros(4), 10)


class TestCalibration:
    def test_lambda_one_is_endpoint(self):
        assert calibrate_hyperparameter(synthetic_curve(), 1.0) == 1.0

    def test_lambda_zero_matches_reference(self):
        # mu_b crosses 0.10 halfway between 0.2 (0.12) and 0.5 (0.08)
        assert calibrate_hyperparameter(synthetic_curve(), 0.0) == pytest.approx(0.35)

    def test_interpolated_target(self):
        # target 0.10 - 0.5 * 0.04 = 0.08 -> exactly the 0.5 grid point
        assert calibrate_hyperparameter(synthetic_curve(), 0.5) == pytest.approx(0.5)

    def test_out_of_range(self):
        c = synthetic_curve()
        c.mu_a[:] = 0.5
        with pytest.raises(CalibrationError):
            calibrate_hyperparameter(c, 0.0)

    def test_bad_lambda(self):
        with pytest.raises(CalibrationError):
            calibrate_hyperparameter(synthetic_curve(), 1.5)


class TestRhoSweep:
    def test_identical_algorithms_flagged(self):
        recs = rho_sweep([builtin_source("simple:delta=1.0")], [("majority", "majority")], n_sample=60, reps=30)
        assert recs[0].estimate is None and recs[0].note

    def test_small_dataset_skipped(self, caplog):
        small = RhoSource("tiny", data=Dataset(np.zeros((50, 1)), np.zeros(50, dtype=int)))
        with caplog.at_level(logging.WARNING):
            recs = rho_sweep([small], [("majority", "mean")], n_sample=300, reps=30)
        assert recs == [] and "tiny" in caplog.text

    def test_finite_dataset_without_replacement(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(400, 2))
        y = (X[:, 0] + rng.normal(size=400) > 0).astype(int)
        src = RhoSource("finite", data=Dataset(X, y))
        s = src.sample(300, np.random.default_rng(1))
        assert len({tuple(r) for r in s.X}) == 300

    def test_shared_samples_across_pairs(self):
        arr = e_value_array(builtin_source("simple:delta=1.0"), [("mean", "logreg"), ("logreg", "mean")],
                            n_sample=80, reps=5, seed=1)
        a, b = arr[("mean", "logreg")], arr[("logreg", "mean")]
        assert a.shape == (5, 5, 2) and np.array_equal(a, b)


class TestCompare:
    def test_on_dataset(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 1))
        y = (X[:, 0] > 0).astype(int)
        res = compare_on_dataset(Dataset(X, y), "majority", "mean", ["mcnemar_bcv_5x2", "mcnemar_ho"], seed=7)
        assert res["mcnemar_bcv_5x2"].reject and res["mcnemar_ho"].reject

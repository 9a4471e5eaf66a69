"""Monte Carlo experiments: type I error, power, true-error calibration and rho sweeps.

A replication draws one data set and runs every requested test on its own
resampling scheme (hold-out, K-fold or 5x2 BCV) over that data set. Each
replication's randomness comes only from ``(master_seed, replication_id)``,
so reports are identical regardless of worker count or execution order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import datagen
from .classifiers import ClassifierSpec, fit
from .contingency import (
    ContingencyTable,
    RhoEstimate,
    UndefinedRho,
    average_table,
    estimate_rho,
)
from .partition import Dataset, SplitPair, bcv_5x2_partitions, kfold_partitions, split_holdout
from .rng import SeedLike, as_generator, child_streams, replication_seed
from .significance import (
    DEFAULT_ALPHA,
    TestResult,
    combined_f_5x2cv,
    mcnemar_bcv_5x2,
    mcnemar_bcv_general,
    mcnemar_ho,
    mcnemar_naive_kfold,
    paired_t_5x2cv,
    paired_t_kfold,
    proportional_z,
    validate_test_names,
)

log = logging.getLogger(__name__)

GENERATORS = ("epsilon", "exp6", "simple")
GENERATOR_PARAMS = {"epsilon": ("epsilon",), "exp6": (), "simple": ("delta",)}

HOLDOUT_TESTS = {"mcnemar_ho", "proportional_z"}
KFOLD_TESTS = {"mcnemar_naive_kfold", "paired_t_kfold"}
BCV_TESTS = {"mcnemar_bcv_5x2", "mcnemar_bcv_general", "paired_t_5x2cv", "combined_f_5x2cv"}

STREAMS = ("data", "holdout", "kfold", "bcv")

# spawn-key scopes keep calibration and rho-sweep streams apart from test replications
_CALIBRATION_SCOPE = 1
_RHO_SCOPE = 2


# ---------------------------------------------------------------------------
# loss sources: what a split turns into
# ---------------------------------------------------------------------------


class LossSource:
    """Fixed per-record one-zero losses; splitting just selects records."""

    def __init__(self, loss_a, loss_b):
        self.loss_a = np.asarray(loss_a, dtype=bool)
        self.loss_b = np.asarray(loss_b, dtype=bool)
        if self.loss_a.shape != self.loss_b.shape:
            raise ValueError("loss vectors differ in length")

    @property
    def n(self) -> int:
        return self.loss_a.size

    def fold(self, split: SplitPair) -> tuple[np.ndarray, np.ndarray]:
        return self.loss_a[split.valid], self.loss_b[split.valid]


class ModelSource:
    """Trains both algorithms on the split's training part, scores the validation part."""

    def __init__(self, data: Dataset, spec_a: ClassifierSpec, spec_b: ClassifierSpec):
        self.data, self.spec_a, self.spec_b = data, spec_a, spec_b

    @property
    def n(self) -> int:
        return self.data.n

    def fold(self, split: SplitPair) -> tuple[np.ndarray, np.ndarray]:
        train = self.data.subset(split.train)
        valid = self.data.subset(split.valid)
        a = fit(self.spec_a, train).predict(valid.X)
        b = fit(self.spec_b, train).predict(valid.X)
        return a != valid.y, b != valid.y


def run_tests(
    source,
    tests: Sequence[str],
    streams: dict[str, np.random.Generator],
    alpha: float = DEFAULT_ALPHA,
    rho1: float = 0.5,
    rho2: float = 0.5,
    holdout_fraction: float = 2.0 / 3.0,
    k_folds: int = 10,
) -> dict[str, TestResult]:
    """Run each named test on its own resampling of ``source``."""
    tests = validate_test_names(tests)
    wanted = set(tests)
    out: dict[str, TestResult] = {}

    if wanted & HOLDOUT_TESTS:
        la, lb = source.fold(split_holdout(source.n, holdout_fraction, streams["holdout"]))
        out["mcnemar_ho"] = mcnemar_ho(ContingencyTable.from_losses(la, lb), alpha)
        out["proportional_z"] = proportional_z(int(la.sum()), int(lb.sum()), la.size, alpha)

    if wanted & KFOLD_TESTS:
        tables, diffs = [], []
        for split in kfold_partitions(source.n, k_folds, streams["kfold"]):
            la, lb = source.fold(split)
            tables.append(ContingencyTable.from_losses(la, lb))
            diffs.append(la.mean() - lb.mean())
        out["mcnemar_naive_kfold"] = mcnemar_naive_kfold(tables, alpha)
        out["paired_t_kfold"] = paired_t_kfold(diffs, alpha)

    if wanted & BCV_TESTS:
        tables, diffs = [], []
        for split in bcv_5x2_partitions(source.n, streams["bcv"]).folds():
            la, lb = source.fold(split)
            tables.append(ContingencyTable.from_losses(la, lb))
            diffs.append(la.mean() - lb.mean())
        avg = average_table(tables)
        d = np.reshape(diffs, (5, 2))
        out["mcnemar_bcv_5x2"] = mcnemar_bcv_5x2(avg, alpha)
        out["mcnemar_bcv_general"] = mcnemar_bcv_general(avg, rho1, rho2, alpha)
        out["paired_t_5x2cv"] = paired_t_5x2cv(d, alpha)
        out["combined_f_5x2cv"] = combined_f_5x2cv(d, alpha)

    return {name: out[name] for name in tests}


def compare_on_dataset(
    data: Dataset,
    spec_a,
    spec_b,
    tests: Sequence[str],
    seed: int,
    alpha: float = DEFAULT_ALPHA,
    **kw,
) -> dict[str, TestResult]:
    """Compare two algorithms on one concrete data set."""
    spec_a = ClassifierSpec.parse(spec_a) if isinstance(spec_a, str) else spec_a
    spec_b = ClassifierSpec.parse(spec_b) if isinstance(spec_b, str) else spec_b
    streams = child_streams(np.random.SeedSequence(seed), STREAMS)
    return run_tests(ModelSource(data, spec_a, spec_b), tests, streams, alpha, **kw)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Calibration:
    """Grid over one hyperparameter of algorithm B used to hit target error rates."""

    param: str = "omega"
    grid: tuple[float, ...] = ()
    reps: int = 100
    endpoint: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if len(self.grid) < 2:
            raise ValueError("calibration grid needs at least two values")
        if self.reps < 1:
            raise ValueError("calibration reps must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    generator: str
    n: int
    tests: tuple[str, ...]
    replications: int = 1000
    alpha: float = DEFAULT_ALPHA
    master_seed: int = 0
    algorithms: Optional[tuple[str, str]] = None
    epsilon: float = 0.1
    delta: float = 0.0
    sweep_param: Optional[str] = None
    sweep_values: tuple[float, ...] = ()
    calibration: Optional[Calibration] = None
    rho1: float = 0.5
    rho2: float = 0.5
    holdout_fraction: float = 2.0 / 3.0
    k_folds: int = 10
    name: str = ""

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {', '.join(GENERATORS)}")
        object.__setattr__(self, "tests", validate_test_names(self.tests))
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.generator == "epsilon":
            if self.algorithms is not None:
                raise ValueError("the epsilon generator produces losses directly; omit algorithms")
            datagen.EpsilonConfig(self.n, self.epsilon)
        else:
            if self.algorithms is None or len(self.algorithms) != 2:
                raise ValueError(f"the {self.generator} generator needs two algorithms")
            object.__setattr__(self, "algorithms", tuple(str(ClassifierSpec.parse(a)) for a in self.algorithms))
        if self.sweep_values and not self.sweep_param:
            raise ValueError("sweep_values given without sweep_param")
        if self.sweep_param == "lambda":
            if self.calibration is None:
                raise ValueError("a lambda sweep needs a calibration section")
            if any(not 0.0 <= v <= 1.0 for v in self.sweep_values):
                raise ValueError("lambda values must lie in [0, 1]")
        elif self.sweep_param and self.sweep_param not in GENERATOR_PARAMS[self.generator]:
            if self.generator == "epsilon":
                raise ValueError(f"epsilon scenarios cannot sweep {self.sweep_param!r}")
            for v in self.sweep_values:
                self.spec_b.with_param(self.sweep_param, v)  # validates the domain
        if self.replications < 100:
            log.warning("%d replications: rejection rates are rough below 100", self.replications)

    @property
    def spec_a(self) -> ClassifierSpec:
        return ClassifierSpec.parse(self.algorithms[0])

    @property
    def spec_b(self) -> ClassifierSpec:
        return ClassifierSpec.parse(self.algorithms[1])

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known - {"sweep"}
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        if "sweep" in d:
            sweep = d.pop("sweep")
            if len(sweep) != 1:
                raise ValueError("sweep must map exactly one parameter to its values")
            (param, values), = sweep.items()
            d["sweep_param"], d["sweep_values"] = param, tuple(values)
        if d.get("calibration") is not None and not isinstance(d["calibration"], Calibration):
            d["calibration"] = Calibration(**d["calibration"])
        for key in ("tests", "algorithms"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tests"] = list(self.tests)
        d["sweep_values"] = list(self.sweep_values)
        if self.algorithms is not None:
            d["algorithms"] = list(self.algorithms)
        if self.calibration is not None:
            d["calibration"]["grid"] = list(self.calibration.grid)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Point:
    """One concrete sweep point: generator settings and the two algorithms."""

    sweep_value: Optional[float]
    generator_kw: tuple[tuple[str, float], ...]
    spec_a: Optional[ClassifierSpec]
    spec_b: Optional[ClassifierSpec]
    hyper_value: Optional[float] = None


def _point(cfg: ScenarioConfig, sweep_value: Optional[float], hyper=None) -> Point:
    gen = {p: getattr(cfg, p) for p in GENERATOR_PARAMS[cfg.generator]}
    spec_a = cfg.spec_a if cfg.algorithms else None
    spec_b = cfg.spec_b if cfg.algorithms else None
    param = cfg.sweep_param
    if sweep_value is not None and param:
        if param == "lambda":
            spec_b = spec_b.with_param(cfg.calibration.param, hyper)
        elif param in gen:
            gen[param] = sweep_value
        else:
            spec_b = spec_b.with_param(param, sweep_value)
    return Point(sweep_value, tuple(gen.items()), spec_a, spec_b, hyper)


def _draw_source(cfg: ScenarioConfig, point: Point, rng: np.random.Generator):
    gen = dict(point.generator_kw)
    if cfg.generator == "epsilon":
        la, lb = datagen.epsilon_losses(datagen.EpsilonConfig(cfg.n, gen["epsilon"]), rng)
        return LossSource(la, lb)
    if cfg.generator == "exp6":
        data = datagen.exp6_sample(datagen.Exp6Config(cfg.n), rng)
    else:
        data = datagen.simple_sample(datagen.SimpleConfig(cfg.n, gen["delta"]), rng)
    return ModelSource(data, point.spec_a, point.spec_b)


def _run_point_replication(cfg: ScenarioConfig, point: Point, replication_id: int) -> dict[str, TestResult]:
    streams = child_streams(replication_seed(cfg.master_seed, replication_id), STREAMS)
    source = _draw_source(cfg, point, streams["data"])
    try:
        return run_tests(
            source, cfg.tests, streams, cfg.alpha, cfg.rho1, cfg.rho2, cfg.holdout_fraction, cfg.k_folds
        )
    except Exception as exc:
        raise RuntimeError(f"replication {replication_id} at sweep value {point.sweep_value}: {exc}") from exc


def run_replication(
    cfg: ScenarioConfig, sweep_value: Optional[float], replication_id: int, hyper_value: Optional[float] = None
) -> dict[str, TestResult]:
    """All configured tests on one freshly drawn data set.

    For lambda sweeps ``hyper_value`` is the calibrated hyperparameter of B.
    """
    if cfg.sweep_param == "lambda" and sweep_value is not None and hyper_value is None:
        raise ValueError("lambda sweep points need the calibrated hyperparameter value")
    return _run_point_replication(cfg, _point(cfg, sweep_value, hyper_value), replication_id)


# ---------------------------------------------------------------------------
# scenarios and reports
# ---------------------------------------------------------------------------


@dataclass
class ReportRow:
    test: str
    sweep_param: str
    sweep_value: Optional[float]
    hyper_value: Optional[float]
    replications: int
    rejections: int
    untestable: int

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.replications

    @property
    def se(self) -> float:
        p = self.rejection_rate
        return math.sqrt(p * (1.0 - p) / self.replications)

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "sweep_param": self.sweep_param,
            "sweep_value": self.sweep_value,
            "hyper_value": self.hyper_value,
            "replications": self.replications,
            "rejections": self.rejections,
            "rejection_rate": self.rejection_rate,
            "se": self.se,
            "untestable": self.untestable,
        }


CSV_FIELDS = (
    "scenario", "test", "sweep_param", "sweep_value", "hyper_value",
    "replications", "rejections", "rejection_rate", "se", "untestable",
)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


@dataclass
class SimulationReport:
    config: ScenarioConfig
    rows: list[ReportRow]
    runtime_seconds: float = field(default=0.0, compare=False)

    def rate(self, test: str, sweep_value: Optional[float] = None) -> float:
        return self.row(test, sweep_value).rejection_rate

    def row(self, test: str, sweep_value: Optional[float] = None) -> ReportRow:
        for r in self.rows:
            if r.test == test and (sweep_value is None or r.sweep_value == sweep_value):
                return r
        raise KeyError((test, sweep_value))

    def curve(self, test: str) -> list[ReportRow]:
        return [r for r in self.rows if r.test == test]

    def to_csv(self) -> str:
        """Plot-ready rows; timing is left out so equal runs give equal bytes."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        name = self.config.name or self.config.generator
        for r in self.rows:
            d = r.to_dict()
            w.writerow([name] + [_fmt(d[k]) for k in CSV_FIELDS[1:]])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "provenance": {
                "master_seed": self.config.master_seed,
                "config_hash": self.config.config_hash(),
            },
            "config": self.config.to_dict(),
            "rows": [r.to_dict() for r in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _flags_worker(args) -> list[tuple[tuple[bool, bool], ...]]:
    cfg, point, rep_ids = args
    out = []
    for rep in rep_ids:
        res = _run_point_replication(cfg, point, rep)
        out.append(tuple((r.reject, r.statistic is None) for r in res.values()))
    return out


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _rep_chunks(reps: int, workers: int) -> list[range]:
    if workers <= 1:
        return [range(reps)]
    size = max(1, math.ceil(reps / (4 * workers)))
    return [range(s, min(reps, s + size)) for s in range(0, reps, size)]


def scenario_points(cfg: ScenarioConfig, workers: int = 1) -> tuple[list[Point], Optional["TrueErrorCurve"]]:
    """Concrete sweep points, calibrating hyperparameters for lambda sweeps."""
    if not cfg.sweep_param:
        return [_point(cfg, None)], None
    if cfg.sweep_param != "lambda":
        return [_point(cfg, v) for v in cfg.sweep_values], None
    curve = true_error_curve(cfg, workers=workers)
    points = []
    for lam in cfg.sweep_values:
        hyper = calibrate_hyperparameter(curve, lam, cfg.calibration.endpoint)
        points.append(_point(cfg, lam, round(hyper, 6)))
    return points, curve


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> SimulationReport:
    """Rejection rates of every test at every sweep point."""
    start = time.perf_counter()
    points, _ = scenario_points(cfg, workers)
    rows: list[ReportRow] = []
    chunks = _rep_chunks(cfg.replications, workers)
    for point in points:
        flags = [f for part in _map(_flags_worker, [(cfg, point, c) for c in chunks], workers) for f in part]
        arr = np.array(flags, dtype=bool)  # (reps, tests, 2)
        for t, test in enumerate(cfg.tests):
            rows.append(
                ReportRow(
                    test,
                    cfg.sweep_param or "",
                    point.sweep_value,
                    point.hyper_value,
                    cfg.replications,
                    int(arr[:, t, 0].sum()),
                    int(arr[:, t, 1].sum()),
                )
            )
    return SimulationReport(cfg, rows, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# true error rates and calibration
# ---------------------------------------------------------------------------


@dataclass
class TrueErrorCurve:
    """Population error rates of A and B at each parameter value, averaged over training sets."""

    param: str
    values: tuple[float, ...]
    mu_a: np.ndarray
    mu_b: np.ndarray
    se_a: np.ndarray
    se_b: np.ndarray
    reps: int

    @property
    def mu_ref(self) -> float:
        """Error rate of A (constant when only B depends on the parameter)."""
        return float(np.mean(self.mu_a))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.param, "mu_a", "se_a", "mu_b", "se_b", "reps"])
        for i, v in enumerate(self.values):
            w.writerow([_fmt(v), _fmt(float(self.mu_a[i])), _fmt(float(self.se_a[i])),
                        _fmt(float(self.mu_b[i])), _fmt(float(self.se_b[i])), self.reps])
        return buf.getvalue()


def _population_error(cfg: ScenarioConfig, model, gen: dict) -> float:
    if cfg.generator == "exp6":
        return datagen.exp6_population_error(model)
    return datagen.simple_population_error(model, gen["delta"])


def _curve_worker(args) -> np.ndarray:
    cfg, param, values, rep_ids = args
    base = _point(cfg, None)
    gen_param = param in GENERATOR_PARAMS[cfg.generator]
    out = np.empty((len(rep_ids), len(values), 2))
    for r, rep in enumerate(rep_ids):
        seq = replication_seed(cfg.master_seed, rep, _CALIBRATION_SCOPE)
        rng_seed = child_streams(seq, ("data",))["data"].bit_generator.state
        model_a = None
        for i, v in enumerate(values):
            gen = dict(base.generator_kw)
            spec_b = base.spec_b
            if gen_param:
                gen[param] = v
            else:
                spec_b = spec_b.with_param(param, v)
            rng = np.random.default_rng()
            rng.bit_generator.state = rng_seed  # same training draw for every value
            point = replace(base, generator_kw=tuple(gen.items()), spec_b=spec_b)
            train = _draw_source(cfg, point, rng).data
            if model_a is None or gen_param:
                model_a = fit(base.spec_a, train)
                err_a = _population_error(cfg, model_a, gen)
            out[r, i, 0] = err_a
            out[r, i, 1] = _population_error(cfg, fit(spec_b, train), gen)
    return out


def true_error_curve(
    cfg: ScenarioConfig,
    values: Optional[Sequence[float]] = None,
    reps: Optional[int] = None,
    workers: int = 1,
) -> TrueErrorCurve:
    """Mean population error of both algorithms at each parameter value.

    Uses the calibration grid when the config has one, else the sweep values.
    Every parameter value sees the same ``reps`` training sets of size ``cfg.n``.
    """
    if cfg.calibration is not None:
        param = cfg.calibration.param
        values = tuple(values if values is not None else cfg.calibration.grid)
        reps = reps or cfg.calibration.reps
    else:
        param = cfg.sweep_param
        values = tuple(values if values is not None else cfg.sweep_values)
        reps = reps or cfg.replications
    if not param or not values:
        raise ValueError("no parameter grid to evaluate")
    values = tuple(float(v) for v in values)
    if cfg.generator == "epsilon":
        mu = np.array([v if param == "epsilon" else cfg.epsilon for v in values])
        zero = np.zeros(len(values))
        return TrueErrorCurve(param, values, mu, mu.copy(), zero, zero.copy(), reps)
    chunks = _rep_chunks(reps, workers)
    errs = np.concatenate(_map(_curve_worker, [(cfg, param, values, c) for c in chunks], workers))
    mean = errs.mean(axis=0)
    se = errs.std(axis=0, ddof=1) / math.sqrt(reps) if reps > 1 else np.zeros_like(mean)
    return TrueErrorCurve(param, values, mean[:, 0], mean[:, 1], se[:, 0], se[:, 1], reps)


class CalibrationError(ValueError):
    pass


def calibrate_hyperparameter(
    curve: Union[TrueErrorCurve, ScenarioConfig], target_lambda: float, endpoint: Optional[float] = None
) -> float:
    """Hyperparameter of B whose true error is mu_A - lambda (mu_A - mu_B(endpoint)).

    ``curve`` may be a config, in which case its calibration curve is computed
    first. ``endpoint`` defaults to the config's calibration endpoint, else the
    largest grid value. Crossings are located by
    linear interpolation between grid points; if the curve crosses the target
    more than once, the crossing closest to the endpoint wins.
    """
    if not 0.0 <= target_lambda <= 1.0:
        raise CalibrationError("lambda must lie in [0, 1]")
    if isinstance(curve, ScenarioConfig):
        if endpoint is None and curve.calibration is not None:
            endpoint = curve.calibration.endpoint
        curve = true_error_curve(curve)
    grid = np.asarray(curve.values, dtype=float)
    order = np.argsort(grid)
    grid, mu = grid[order], np.asarray(curve.mu_b)[order]
    endpoint = float(grid[-1] if endpoint is None else endpoint)
    if endpoint not in grid:
        raise CalibrationError(f"endpoint {endpoint} is not on the grid")
    mu_end = float(mu[grid == endpoint][0])
    if target_lambda == 1.0:
        return endpoint
    target = curve.mu_ref - target_lambda * (curve.mu_ref - mu_end)
    crossings = []
    for i in range(grid.size - 1):
        lo, hi = mu[i] - target, mu[i + 1] - target
        if lo == 0.0:
            crossings.append(grid[i])
        elif lo * hi < 0.0:
            crossings.append(grid[i] + (grid[i + 1] - grid[i]) * lo / (lo - hi))
    if mu[-1] == target:
        crossings.append(grid[-1])
    if not crossings:
        raise CalibrationError(
            f"target error {target:.4f} outside the achievable range [{mu.min():.4f}, {mu.max():.4f}]"
        )
    return float(min(crossings, key=lambda g: (abs(g - endpoint), g)))


# ---------------------------------------------------------------------------
# rho sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhoSource:
    """A named population for the rho sweep.

    Either a finite ``data`` set (sampled without replacement) or a ``draw``
    callable ``(n, rng) -> Dataset``. ``losses`` mode draws epsilon loss vectors
    instead and ignores algorithm pairs.
    """

    name: str
    data: Optional[Dataset] = None
    draw: Optional[Callable[[int, np.random.Generator], Dataset]] = None
    epsilon: Optional[float] = None

    def sample(self, n: int, rng: np.random.Generator):
        if self.epsilon is not None:
            return LossSource(*datagen.epsilon_losses(datagen.EpsilonConfig(n, self.epsilon), rng))
        if self.draw is not None:
            return self.draw(n, rng)
        idx = rng.choice(self.data.n, size=n, replace=False)
        return self.data.subset(np.sort(idx))

    def available(self, n: int) -> bool:
        return self.data is None or self.data.n >= n


def builtin_source(text: str) -> RhoSource:
    """``exp6``, ``simple:delta=1.0``, ``epsilon:epsilon=0.1`` or a CSV path."""
    kind, _, rest = text.partition(":")
    opts = dict(item.split("=", 1) for item in rest.split(",") if item)
    if kind == "exp6":
        return RhoSource(text, draw=lambda n, rng: datagen.exp6_sample(datagen.Exp6Config(n), rng))
    if kind == "simple":
        delta = float(opts.get("delta", 1.0))
        return RhoSource(text, draw=lambda n, rng: datagen.simple_sample(datagen.SimpleConfig(n, delta), rng))
    if kind == "epsilon":
        return RhoSource(text, epsilon=float(opts.get("epsilon", 0.1)))
    return RhoSource(text, data=Dataset.from_csv(text))


@dataclass(frozen=True)
class RhoRecord:
    dataset: str
    alg_a: str
    alg_b: str
    estimate: Optional[RhoEstimate]
    note: str = ""

    def as_row(self):
        return (self.dataset, self.alg_a, self.alg_b, self.estimate)


def _rho_worker(args) -> np.ndarray:
    source, algos, pair_idx, n_sample, seed, src_index, rep_ids = args
    e = np.empty((len(rep_ids), len(pair_idx), 10))
    for r, rep in enumerate(rep_ids):
        rng = np.random.default_rng(replication_seed(seed, rep, _RHO_SCOPE, src_index))
        sample = source.sample(n_sample, rng)
        ps = bcv_5x2_partitions(n_sample, rng)
        for f, split in enumerate(ps.folds()):
            if isinstance(sample, LossSource):
                la, lb = sample.fold(split)
                e[r, 0, f] = np.mean(la != lb)
                continue
            train, valid = sample.subset(split.train), sample.subset(split.valid)
            pred = [fit(spec, train).predict(valid.X) for spec in algos]
            for p, (ia, ib) in enumerate(pair_idx):
                e[r, p, f] = np.mean(pred[ia] != pred[ib])
    return e


def e_value_array(
    source: RhoSource,
    pairs: Sequence[tuple[str, str]],
    n_sample: int = 300,
    reps: int = 1000,
    seed: int = 0,
    source_index: int = 0,
    workers: int = 1,
) -> dict[tuple[str, str], np.ndarray]:
    """(reps, 5, 2) arrays of per-fold disagreement estimates E for each pair.

    All pairs on one source share the same samples and partitions; each
    algorithm is fitted once per fold. Loss-mode sources yield a single
    ``("A", "B")`` entry.
    """
    if source.epsilon is not None:
        pairs, algos, pair_idx = [("A", "B")], [], [(0, 1)]
    else:
        names: list[str] = []
        for a, b in pairs:
            for s in (a, b):
                if str(ClassifierSpec.parse(s)) not in names:
                    names.append(str(ClassifierSpec.parse(s)))
        algos = [ClassifierSpec.parse(s) for s in names]
        pair_idx = [(names.index(str(ClassifierSpec.parse(a))), names.index(str(ClassifierSpec.parse(b))))
                    for a, b in pairs]
    jobs = [(source, algos, pair_idx, n_sample, seed, source_index, c) for c in _rep_chunks(reps, workers)]
    e = np.concatenate(_map(_rho_worker, jobs, workers))
    return {tuple(pair): e[:, p, :].reshape(reps, 5, 2) for p, pair in enumerate(pairs)}


def rho_sweep(
    sources: Sequence[RhoSource],
    pairs: Sequence[tuple[str, str]],
    n_sample: int = 300,
    reps: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> list[RhoRecord]:
    """Estimate (rho1, rho2) for every (source, pair); undefined estimates are kept with a note."""
    records = []
    for s_idx, source in enumerate(sources):
        if not source.available(n_sample):
            log.warning("skipping %s: fewer than %d records", source.name, n_sample)
            continue
        arrays = e_value_array(source, pairs, n_sample, reps, seed, s_idx, workers)
        for (a, b), e in arrays.items():
            try:
                records.append(RhoRecord(source.name, str(a), str(b), estimate_rho(e)))
            except UndefinedRho as exc:
                records.append(RhoRecord(source.name, str(a), str(b), None, str(exc)))
    return records

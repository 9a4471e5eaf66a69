"""Block-regularized 5x2 cross-validated McNemar test for comparing classifiers."""

from .contingency import (
    AveragedTable,
    ContingencyTable,
    EffectiveTable,
    RhoEstimate,
    average_table,
    effective_table,
    estimate_rho,
    posterior_params,
)
from .partition import Dataset, PartitionSet5x2, SplitPair, bcv_5x2_partitions, kfold_partitions, split_holdout
from .significance import TEST_NAMES, TestResult, mcnemar_bcv_5x2, mcnemar_bcv_general, mcnemar_ho

__version__ = "0.1.0"

__all__ = [
    "AveragedTable",
    "ContingencyTable",
    "Dataset",
    "EffectiveTable",
    "PartitionSet5x2",
    "RhoEstimate",
    "SplitPair",
    "TEST_NAMES",
    "TestResult",
    "average_table",
    "bcv_5x2_partitions",
    "effective_table",
    "estimate_rho",
    "kfold_partitions",
    "mcnemar_bcv_5x2",
    "mcnemar_bcv_general",
    "mcnemar_ho",
    "posterior_params",
    "split_holdout",
]

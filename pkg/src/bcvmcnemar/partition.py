"""Train/validation splitting: hold-out, K-fold and the block-regularized 5x2 CV."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np

from .rng import SeedLike, as_generator

# Rows of the L8(2^7)-derived plan: 0-based sub-block ids forming S_j.
BCV_TRAIN_BLOCKS: tuple[tuple[int, ...], ...] = (
    (0, 1, 2, 3),
    (0, 2, 4, 6),
    (0, 1, 4, 5),
    (0, 3, 4, 7),
    (0, 2, 5, 7),
)

# Order in which sub-blocks receive the n mod 8 leftover records. Every prefix
# keeps each row within one record of n/2 on either side.
_LEFTOVER_ORDER = (0, 1, 6, 2, 7, 3, 4, 5)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.int64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Records as a feature matrix ``X`` (n, d) and integer labels ``y``."""

    X: np.ndarray
    y: np.ndarray
    class_names: tuple[str, ...] = ()
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y)
        if not np.issubdtype(y.dtype, np.integer):
            raise TypeError("labels must be integer class ids")
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"feature matrix {X.shape} does not match {y.shape[0]} labels")
        X.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    def __len__(self) -> int:
        return self.n

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.class_names, self.feature_names)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Dataset":
        """Header row; last column is the class label, the rest numeric."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 2:
            raise ValueError(f"{path}: need a header and at least one record")
        header, body = rows[0], [r for r in rows[1:] if r]
        X = np.array([[float(v) for v in r[:-1]] for r in body], dtype=float)
        raw = [r[-1].strip() for r in body]
        try:
            numeric = sorted({int(v) for v in raw})
            names = tuple(str(v) for v in numeric)
            lookup = {str(v): i for i, v in enumerate(numeric)}
            y = np.array([lookup[str(int(v))] for v in raw])
        except ValueError:
            names = tuple(sorted(set(raw)))
            lookup = {v: i for i, v in enumerate(names)}
            y = np.array([lookup[v] for v in raw])
        return cls(X.reshape(len(body), -1), y, names, tuple(header[:-1]))

    def to_csv(self, path: Union[str, Path]) -> None:
        names = self.feature_names or tuple(f"x{i + 1}" for i in range(self.X.shape[1]))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([*names, "label"])
            for row, label in zip(self.X, self.y):
                tag = self.class_names[label] if self.class_names else int(label)
                w.writerow([repr(float(v)) for v in row] + [tag])


@dataclass(frozen=True)
class SplitPair:
    """One (training, validation) split of the index range ``0..n-1``."""

    train: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "train", _frozen(np.sort(self.train)))
        object.__setattr__(self, "valid", _frozen(np.sort(self.valid)))

    def swapped(self) -> "SplitPair":
        return SplitPair(self.valid, self.train)

    def to_dict(self) -> dict:
        return {"train": self.train.tolist(), "valid": self.valid.tolist()}


@dataclass(frozen=True)
class PartitionSet5x2:
    """Eight sub-blocks and the five regularized splits assembled from them."""

    blocks: tuple[np.ndarray, ...]
    pairs: tuple[SplitPair, ...] = field(init=False)

    def __post_init__(self):
        if len(self.blocks) != 8:
            raise ValueError("a 5x2 BCV plan needs exactly 8 sub-blocks")
        blocks = tuple(_frozen(np.sort(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        pairs = []
        for row in BCV_TRAIN_BLOCKS:
            train = np.concatenate([blocks[b] for b in row])
            valid = np.concatenate([blocks[b] for b in range(8) if b not in row])
            pairs.append(SplitPair(train, valid))
        object.__setattr__(self, "pairs", tuple(pairs))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def folds(self) -> Iterator[SplitPair]:
        """The ten hold-out folds in (j, k) order: (S_j, T_j) then (T_j, S_j)."""
        for pair in self.pairs:
            yield pair
            yield pair.swapped()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "blocks": [b.tolist() for b in self.blocks],
            "pairs": [
                {"train_blocks": [b + 1 for b in row], **p.to_dict()}
                for row, p in zip(BCV_TRAIN_BLOCKS, self.pairs)
            ],
            "train_overlaps": pairwise_overlaps(self),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _size(d: Union[Dataset, int]) -> int:
    return d if isinstance(d, (int, np.integer)) else len(d)


def split_holdout(d: Union[Dataset, int], train_fraction: float, seed: SeedLike) -> SplitPair:
    n = _size(d)
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n_train = int(np.floor(train_fraction * n + 0.5))
    if not 0 < n_train < n:
        raise ValueError(f"train_fraction={train_fraction} leaves an empty side for n={n}")
    perm = as_generator(seed).permutation(n)
    return SplitPair(perm[:n_train], perm[n_train:])


def kfold_partitions(d: Union[Dataset, int], K: int, seed: SeedLike) -> list[SplitPair]:
    n = _size(d)
    if K < 2:
        raise ValueError("K must be at least 2")
    if K > n:
        raise ValueError(f"K={K} exceeds the number of records n={n}")
    perm = as_generator(seed).permutation(n)
    folds = np.array_split(perm, K)
    out = []
    for k, valid in enumerate(folds):
        train = np.concatenate([f for i, f in enumerate(folds) if i != k])
        out.append(SplitPair(train, valid))
    return out


def bcv_5x2_partitions(
    d: Union[Dataset, int], seed: SeedLike, stratify: bool = False
) -> PartitionSet5x2:
    """Shuffle once, deal records into eight sub-blocks, assemble the five splits.

    With ``stratify`` the shuffled records are grouped by label before dealing,
    so every sub-block gets a near-equal share of each class.
    """
    n = _size(d)
    if n < 8:
        raise ValueError(f"5x2 BCV needs at least 8 records, got {n}")
    rng = as_generator(seed)
    order = rng.permutation(n)
    if stratify:
        if not isinstance(d, Dataset):
            raise ValueError("stratified blocking needs labels")
        order = order[np.argsort(d.y[order], kind="stable")]
    slots = np.array(_LEFTOVER_ORDER)[np.arange(n) % 8]
    return PartitionSet5x2(tuple(order[slots == b] for b in range(8)))


def overlap_count(a: SplitPair, b: SplitPair) -> int:
    return int(np.intersect1d(a.train, b.train, assume_unique=True).size)


def pairwise_overlaps(ps: PartitionSet5x2) -> list[int]:
    """|S_j ∩ S_j'| for the ten unordered pairs j < j'."""
    return [
        overlap_count(ps.pairs[i], ps.pairs[j])
        for i in range(5)
        for j in range(i + 1, 5)
    ]


def block_sizes(ps: PartitionSet5x2) -> Sequence[int]:
    return [len(b) for b in ps.blocks]

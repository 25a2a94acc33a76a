"""Deterministic k-fold dataset splitting (plain and label-stratified)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DatasetSplit:
    fold_index: int
    train_ids: frozenset
    test_ids: frozenset
    seed: int


def kfold_split(ids, k: int, seed: int) -> list[DatasetSplit]:
    """Split ``ids`` into k folds; shuffling is driven solely by ``seed``.

    Test folds partition the ids and their sizes differ by at most one.
    """
    ids = list(ids)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(ids):
        raise ValueError(f"k={k} exceeds number of ids ({len(ids)})")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    folds = _deal(order, k)
    return _to_splits(folds, ids, seed)


def stratified_kfold_split(ids, labels: dict, k: int, seed: int) -> list[DatasetSplit]:
    """k-fold split keeping each label's share roughly constant per fold.

    ``labels`` maps id -> label; ids missing from the map form their own
    stratum. Whether the source experiments stratified their folds is
    undocumented, so pipelines expose both this and :func:`kfold_split`.
    """
    ids = list(ids)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(ids):
        raise ValueError(f"k={k} exceeds number of ids ({len(ids)})")
    rng = np.random.default_rng(seed)
    strata: dict = {}
    for i in ids:
        strata.setdefault(labels.get(i), []).append(i)
    folds: list[list] = [[] for _ in range(k)]
    offset = 0
    for key in sorted(strata, key=lambda x: (x is None, str(x))):
        members = strata[key]
        order = [members[i] for i in rng.permutation(len(members))]
        # Rotate the starting fold per stratum so remainders spread out.
        for j, member in enumerate(order):
            folds[(j + offset) % k].append(member)
        offset += len(members) % k
    return _to_splits(folds, ids, seed)


def _deal(order: list, k: int) -> list[list]:
    n = len(order)
    base, extra = divmod(n, k)
    folds, start = [], 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(order[start:start + size])
        start += size
    return folds


def _to_splits(folds: list[list], ids: list, seed: int) -> list[DatasetSplit]:
    all_ids = frozenset(ids)
    splits = []
    for i, fold in enumerate(folds):
        test = frozenset(fold)
        splits.append(DatasetSplit(
            fold_index=i,
            train_ids=all_ids - test,
            test_ids=test,
            seed=seed,
        ))
    return splits

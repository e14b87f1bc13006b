"""Shared value types and input-validation helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense per-user vectors with an aligned user-id index.

    `provenance` records which learner produced the matrix and with what
    hyperparameters, so a persisted embedding is self-describing.
    """

    user_ids: tuple[str, ...]
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("embedding values must be a 2-D array")
        if values.shape[0] != len(self.user_ids):
            raise ValueError(
                f"{values.shape[0]} rows for {len(self.user_ids)} user ids"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "user_ids", tuple(self.user_ids))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def select(self, rows: np.ndarray) -> "EmbeddingMatrix":
        """Row subset in the given order, keeping provenance."""
        ids = tuple(self.user_ids[i] for i in rows)
        return EmbeddingMatrix(ids, self.values[rows], dict(self.provenance))


def as_dense(x) -> np.ndarray:
    """Sparse or dense input to a C-contiguous float64 2-D array."""
    if sp.issparse(x):
        x = x.toarray()
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return arr


def check_finite(x: np.ndarray, name: str = "input") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN or Inf")
    return x


def check_aligned(a: EmbeddingMatrix, b: EmbeddingMatrix) -> None:
    if a.user_ids != b.user_ids:
        raise ValueError("views are not aligned on the same user index")


def check_random_seed(seed) -> np.random.Generator:
    """Seed (or Generator) to a Generator; reuse is the caller's problem."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)

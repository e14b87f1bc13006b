"""Truncated SVD of a sparse user-item matrix.

The user embedding is U * diag(s): left singular vectors scaled by the
singular values, which is the best rank-r reconstruction basis in the
Frobenius sense.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ..base import EmbeddingMatrix


class TruncatedSvd(BaseEstimator, TransformerMixin):
    """Rank-r factorization A ~= U diag(s) V^T with an iterative sparse solver.

    Attributes after fit: `components_` (r x n), `singular_values_`
    (descending), `row_factors_` (m x r, orthonormal columns).
    """

    def __init__(self, rank: int = 50):
        self.rank = rank

    def fit(self, X, y=None):
        X = sp.csr_matrix(X, dtype=np.float64)
        m, n = X.shape
        if m == 0 or n == 0:
            raise ValueError("matrix must be nonempty")
        if self.rank < 1 or self.rank > min(m, n):
            raise ValueError(f"rank must lie in [1, {min(m, n)}], got {self.rank}")
        if X.nnz == 0:
            raise ValueError("matrix is all zeros")
        if self.rank < min(m, n):
            # ARPACK Lanczos; v0 fixed for determinism
            u, s, vt = spla.svds(X, k=self.rank, v0=np.ones(min(m, n)), tol=0)
            order = np.argsort(s)[::-1]
            u, s, vt = u[:, order], s[order], vt[order]
        else:
            u, s, vt = np.linalg.svd(X.toarray(), full_matrices=False)
            u, s, vt = u[:, :self.rank], s[:self.rank], vt[:self.rank]
        u, vt = _fix_signs(u, vt)
        self.row_factors_ = u
        self.singular_values_ = s
        self.components_ = vt
        return self

    def transform(self, X):
        """Project rows onto the fitted right singular basis: X V."""
        if not hasattr(self, "components_"):
            raise NotFittedError("TruncatedSvd is not fitted")
        X = sp.csr_matrix(X, dtype=np.float64)
        return np.asarray(X @ self.components_.T)

    def embedding(self, user_ids) -> EmbeddingMatrix:
        """Training-row embedding U * diag(s) with provenance."""
        if not hasattr(self, "components_"):
            raise NotFittedError("TruncatedSvd is not fitted")
        values = self.row_factors_ * self.singular_values_
        return EmbeddingMatrix(
            tuple(user_ids),
            values,
            {"learner": "svd", "hyperparameters": {"rank": self.rank}},
        )

    def reconstruction(self) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise NotFittedError("TruncatedSvd is not fitted")
        return (self.row_factors_ * self.singular_values_) @ self.components_


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make each left singular vector's largest-magnitude entry positive."""
    for j in range(u.shape[1]):
        pivot = np.argmax(np.abs(u[:, j]))
        if u[pivot, j] < 0:
            u[:, j] = -u[:, j]
            vt[j] = -vt[j]
    return u, vt


def svd_fit(a, rank: int) -> TruncatedSvd:
    return TruncatedSvd(rank=rank).fit(a)


def svd_embed(model: TruncatedSvd, user_ids) -> EmbeddingMatrix:
    return model.embedding(user_ids)

"""Parameter-free copula-based outlier scoring (COPOD) for row samples.

Given an (n, d) matrix with rows as samples, each column contributes a
left-tail, right-tail, and skewness-corrected tail probability per sample via
its empirical CDF.  A sample's score is the largest of the three negated
log-probability sums, so true outliers in either tail get large scores.

Scoring is rank-based: any strictly increasing per-column transform of the
input leaves the scores unchanged.  Both ECDFs use weak inequalities, so
every value is at least 1/n and the logarithms stay finite; a zero-variance
column yields all-ones tables and contributes nothing.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, NumericError
from .params import DistancePair


def ecdf_left(column) -> np.ndarray:
    """Left-tail ECDF evaluated at each point: F(x_i) = |{k : x_k <= x_i}| / n."""
    x = _as_column(column)
    return (x[:, None] >= x[None, :]).mean(axis=1)


def ecdf_right(column) -> np.ndarray:
    """Right-tail ECDF: F(x_i) = |{k : x_k >= x_i}| / n.

    Equals ecdf_left applied to the negated column.
    """
    x = _as_column(column)
    return (x[:, None] <= x[None, :]).mean(axis=1)


def skew_sign(column) -> int:
    """Sign of the third central moment; magnitudes below 1e-12 map to 0.

    Only the sign feeds the skewness correction, so no normalization (and no
    divide-by-zero branch for constant columns) is needed.
    """
    x = _as_column(column)
    if x.size < 2:
        raise ConfigError("skew_sign needs at least 2 values")
    m3 = np.mean((x - x.mean()) ** 3)
    if abs(m3) < 1e-12:
        return 0
    return 1 if m3 > 0 else -1


def copod_scores(matrix) -> np.ndarray:
    """Score each row of an (n, d) matrix; larger means more outlying.

    Per column j: U_ij = left ECDF, V_ij = right ECDF, and W_ij picks U when
    the column is left-skewed, V otherwise.  Per row: the score is
    max(-sum_j ln U_ij, -sum_j ln V_ij, -sum_j ln W_ij), each term bounded by
    ln(n).
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ConfigError(f"expected a 2-D matrix, got shape {m.shape}")
    n, d = m.shape
    if n < 2:
        raise ConfigError(f"COPOD needs at least 2 rows, got {n}")
    if not np.all(np.isfinite(m)):
        raise NumericError("score matrix contains NaN or Inf")

    u = np.empty((n, d))
    v = np.empty((n, d))
    w = np.empty((n, d))
    for j in range(d):
        col = m[:, j]
        u[:, j] = ecdf_left(col)
        v[:, j] = ecdf_right(col)
        w[:, j] = u[:, j] if skew_sign(col) < 0 else v[:, j]

    p_left = -np.log(u).sum(axis=1)
    p_right = -np.log(v).sum(axis=1)
    p_skew = -np.log(w).sum(axis=1)
    return np.maximum(p_left, np.maximum(p_right, p_skew))


def dos_outlier_scores(distances: DistancePair) -> np.ndarray:
    """Average the COPOD scores of the Euclidean and cosine distance matrices.

    The self-distance diagonal stays in: the black-box scorer takes the full
    (n, n) matrix and the weak-inequality ECDFs absorb the tied zeros.
    """
    r_e = copod_scores(distances.euclidean)
    r_c = copod_scores(distances.cosine)
    return (r_e + r_c) / 2.0


def _as_column(column) -> np.ndarray:
    x = np.asarray(column, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ConfigError(f"expected a non-empty 1-D column, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericError("column contains NaN or Inf")
    return x

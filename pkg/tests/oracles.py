"""Independent brute-force oracles, kept deliberately loop-based and
numpy-free in their arithmetic so they share nothing with the library path."""

import math


def copod_scores_oracle(matrix):
    """Explicit U/V/W tables, per-row log sums, max fusion."""
    m = [[float(x) for x in row] for row in matrix]
    n = len(m)
    d = len(m[0])
    u = [[sum(1 for k in range(n) if m[k][j] <= m[i][j]) / n for j in range(d)]
         for i in range(n)]
    v = [[sum(1 for k in range(n) if m[k][j] >= m[i][j]) / n for j in range(d)]
         for i in range(n)]
    skew = []
    for j in range(d):
        col = [m[k][j] for k in range(n)]
        mean = sum(col) / n
        m3 = sum((x - mean) ** 3 for x in col) / n
        skew.append(0 if abs(m3) < 1e-12 else (1 if m3 > 0 else -1))
    scores = []
    for i in range(n):
        p_left = -sum(math.log(u[i][j]) for j in range(d))
        p_right = -sum(math.log(v[i][j]) for j in range(d))
        p_skew = -sum(math.log(u[i][j] if skew[j] < 0 else v[i][j]) for j in range(d))
        scores.append(max(p_left, p_right, p_skew))
    return scores


def median_oracle(rows):
    """Per-coordinate median, even count averaged."""
    n = len(rows)
    d = len(rows[0])
    out = []
    for j in range(d):
        col = sorted(float(r[j]) for r in rows)
        if n % 2 == 1:
            out.append(col[n // 2])
        else:
            out.append((col[n // 2 - 1] + col[n // 2]) / 2.0)
    return out


def trimmed_mean_oracle(rows, trim_fraction):
    n = len(rows)
    d = len(rows[0])
    k = math.floor(trim_fraction * n)
    out = []
    for j in range(d):
        col = sorted(float(r[j]) for r in rows)[k:n - k]
        out.append(sum(col) / len(col))
    return out


def krum_select_oracle(rows, f):
    """Index of the update with the smallest sum of squared distances to its
    n - f - 2 nearest peers; first index on ties."""
    n = len(rows)
    neighbors = n - f - 2
    best, best_score = None, None
    for i in range(n):
        dists = []
        for j in range(n):
            if j == i:
                continue
            dists.append(sum((float(a) - float(b)) ** 2 for a, b in zip(rows[i], rows[j])))
        score = sum(sorted(dists)[:neighbors])
        if best_score is None or score < best_score:
            best, best_score = i, score
    return best

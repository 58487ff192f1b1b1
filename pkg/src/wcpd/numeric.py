"""Self-contained dense kernels: Jacobi eigendecomposition, k-means, assignment.

The matrices these routines see are small (segment counts, cluster counts), so
the implementations favor determinism and testability over scalability: every
tie has a documented break, and identical inputs always produce identical
outputs.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError

__all__ = ["eigh_symmetric", "kmeans", "hungarian"]

_SYM_TOL = 1e-12
_OFF_DIAG_TOL = 1e-12
_MAX_SWEEPS = 100
_MAX_LLOYD_ITERATIONS = 300


def eigh_symmetric(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    matrix : (n, n) array-like, symmetric to 1e-12.

    Returns
    -------
    eigenvalues : (n,) ascending.
    eigenvectors : (n, n) orthonormal columns aligned with the eigenvalues;
        each column's first nonvanishing entry is made positive so downstream
        consumers see a reproducible basis.

    Sweeps run until the off-diagonal Frobenius mass drops below 1e-12, and a
    NumericalError is raised if 100 sweeps are not enough.
    """
    A = np.array(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError("matrix must be square and nonempty")
    if float(np.abs(A - A.T).max()) > _SYM_TOL:
        raise ValueError("matrix is not symmetric")
    n = A.shape[0]
    V = np.eye(n)

    def off_diagonal_mass() -> float:
        return np.sqrt(2.0 * float(np.sum(np.tril(A, -1) ** 2)))

    converged = False
    for _ in range(_MAX_SWEEPS):
        if off_diagonal_mass() < _OFF_DIAG_TOL:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                gap = A[q, q] - A[p, p]
                if abs(apq) < 1e-36 * abs(gap):
                    # rotation angle underflows; the entry is already negligible
                    t = apq / gap
                else:
                    theta = gap / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0

                vec_p = V[:, p].copy()
                vec_q = V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
    if not converged and off_diagonal_mass() >= _OFF_DIAG_TOL:
        raise NumericalError("eigendecomposition did not converge")

    eigenvalues = A.diagonal().copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    V = V[:, order]
    for col in range(n):
        nonzero = np.flatnonzero(np.abs(V[:, col]) > 1e-12)
        if nonzero.size and V[nonzero[0], col] < 0.0:
            V[:, col] = -V[:, col]
    return eigenvalues, V


def _plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    idx = int(rng.integers(n))
    centers[0] = points[idx]
    chosen = {idx}
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining mass sits on already-chosen points (duplicates)
            idx = min(i for i in range(n) if i not in chosen)
        chosen.add(idx)
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, history: list | None = None):
    n = points.shape[0]
    k = centers.shape[0]
    labels = np.full(n, -1)
    for _ in range(_MAX_LLOYD_ITERATIONS):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), new_labels]
        if history is not None:
            history.append(float(point_d2.sum()))
        for c in range(k):
            mask = new_labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
            else:
                # revive an emptied cluster with the currently worst-fit point
                far = int(np.argmax(point_d2))
                centers[c] = points[far]
                new_labels[far] = c
                point_d2[far] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(((points - centers[labels]) ** 2).sum())
    return labels, inertia


def kmeans(points, k: int, seed: int, restarts: int = 10) -> np.ndarray:
    """Deterministic k-means: ++ seeding, Lloyd to a fixpoint, best of restarts.

    All randomness flows from one generator seeded with ``seed``; the restart
    with the lowest within-cluster sum of squares wins, earliest restart on a
    tie.
    """
    pts = np.array(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n = pts.shape[0]
    if k < 1:
        raise ValueError("cluster count must be at least 1")
    if k > n:
        raise ValueError("more clusters than points")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    rng = np.random.default_rng(seed)
    best_labels = None
    best_inertia = np.inf
    for _ in range(restarts):
        centers = _plus_plus_init(pts, k, rng)
        labels, inertia = _lloyd(pts, centers)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def _assignment_cost(cost: np.ndarray) -> float:
    """Minimum total cost of a perfect assignment (potentials method)."""
    n = cost.shape[0]
    INF = np.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j] = row currently matched to column j (1-based)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    return float(sum(cost[p[j] - 1, j - 1] for j in range(1, n + 1)))


def hungarian(cost) -> list[int]:
    """Minimum-cost one-to-one assignment on a square cost matrix.

    Returns ``perm`` with row i assigned to column perm[i]. Among all
    minimum-cost assignments the lexicographically smallest permutation is
    returned, which pins down the result when costs tie.
    """
    C = np.array(cost, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] == 0:
        raise ValueError("cost matrix must be square and nonempty")
    if not np.all(np.isfinite(C)):
        raise ValueError("non-finite cost entry")
    n = C.shape[0]
    best_total = _assignment_cost(C)
    tol = 1e-9 * max(1.0, abs(best_total))

    cols = list(range(n))
    perm: list[int] = []
    prefix = 0.0
    for row in range(n):
        for pos, col in enumerate(cols):
            rest = cols[:pos] + cols[pos + 1 :]
            if row + 1 < n:
                tail = _assignment_cost(C[np.ix_(range(row + 1, n), rest)])
            else:
                tail = 0.0
            if prefix + C[row, col] + tail <= best_total + tol:
                perm.append(col)
                cols = rest
                prefix += C[row, col]
                break
        else:  # pragma: no cover - some column always completes an optimum
            raise NumericalError("assignment refinement failed")
    return perm

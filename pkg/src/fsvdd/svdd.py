"""RBF-kernel support vector data description.

The training weights ``alpha`` minimize the quadratic ``alpha' K alpha``
over the capped simplex ``{sum(alpha) = 1, 0 <= alpha_k <= C}``. The optimal
objective value is the density limit ``D``; a query is healthy when its
kernel density ``sum_k alpha_k K(x_k, x)`` reaches that limit.

Vectors may be real or complex; the kernel uses the sum of squared moduli
of the difference, which equals the squared Euclidean norm of the
concatenated real/imaginary parts, so one code path serves both.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SolverNotConverged

# Densities compare against the limit with a tiny slack toward "healthy":
# support vectors sit exactly on the limit at the optimum, so an exact >=
# would flip on round-off noise.
DECISION_SLACK = 1e-9

SUPPORT_PRUNE_TOL = 1e-9

DEFAULT_GAMMA_GRID = tuple(2.0**k for k in range(-24, 9))


@dataclass
class KernelParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")


@dataclass
class FitReport:
    objective: float
    iterations: int
    kkt_violation: float


@dataclass
class SvddModel:
    support_vectors: np.ndarray  # (n_sv, dim), real or complex
    alpha: np.ndarray            # (n_sv,) positive weights summing to 1
    gamma: float
    C: float
    density_limit: float
    corrected_limit: float | None = None
    representation_tag: str = "raw"

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.support_vectors = np.asarray(self.support_vectors)
        if self.support_vectors.ndim != 2:
            raise ValueError("support vectors must be a 2-D array")
        if self.alpha.shape != (self.support_vectors.shape[0],):
            raise ValueError("alpha must align with support vectors")


def _as_matrix(X) -> np.ndarray:
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[None, :]
    elif arr.ndim != 2:
        arr = np.stack([np.asarray(v) for v in X])
    if arr.shape[0] == 0:
        raise ValueError("empty vector set")
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64)
    return arr


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared distances, complex-safe, clipped at zero."""
    if np.iscomplexobj(A) or np.iscomplexobj(B):
        A = A.astype(np.complex128)
        B = B.astype(np.complex128)
        na = np.sum(A.real**2 + A.imag**2, axis=1)
        nb = np.sum(B.real**2 + B.imag**2, axis=1)
        cross = (A @ B.conj().T).real
    else:
        na = np.sum(A * A, axis=1)
        nb = np.sum(B * B, axis=1)
        cross = A @ B.T
    d2 = na[:, None] + nb[None, :] - 2.0 * cross
    np.maximum(d2, 0.0, out=d2)
    return d2


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """``exp(-gamma * ||x - y||^2)`` with the modulus-based squared norm."""
    x = np.asarray(x).ravel()
    y = np.asarray(y).ravel()
    if x.shape != y.shape:
        raise ValueError("vector lengths differ")
    diff = x.astype(np.complex128) - y.astype(np.complex128)
    return float(np.exp(-gamma * np.sum(diff.real**2 + diff.imag**2)))


def gram(X, gamma: float) -> np.ndarray:
    """Kernel matrix of a vector set; symmetric with unit diagonal."""
    A = _as_matrix(X)
    return np.exp(-gamma * _sq_dists(A, A))


def _fit_from_gram(K: np.ndarray, C: float, tol: float, max_iter: int):
    """Solve the capped-simplex quadratic given a precomputed Gram matrix."""
    n = K.shape[0]
    if C < 1.0 / n - 1e-12:
        raise ValueError(f"C={C} is infeasible for {n} points (needs C >= 1/K)")
    if C > 1.0 + 1e-12:
        raise ValueError("C must not exceed 1")
    if C <= 1.0 / n:
        # the feasible set is the single point alpha_k = 1/K
        alpha = np.full(n, 1.0 / n)
        obj = float(alpha @ K @ alpha)
        return alpha, FitReport(objective=obj, iterations=0, kkt_violation=0.0)
    alpha, iters, gap = _kernels.smo_solve(
        np.ascontiguousarray(K, dtype=np.float64), float(C), float(tol),
        int(max_iter))
    if gap > 1e-6:
        raise SolverNotConverged(
            f"stationarity gap {gap:.3e} > 1e-6 after {iters} iterations")
    np.clip(alpha, 0.0, C, out=alpha)
    alpha /= alpha.sum()
    obj = float(alpha @ K @ alpha)
    return alpha, FitReport(objective=obj, iterations=int(iters),
                            kkt_violation=float(gap))


def fit(X_T, gamma: float, C: float, tol: float = 1e-10,
        max_iter: int = 100_000,
        representation_tag: str = "raw") -> tuple[SvddModel, FitReport]:
    """Fit the data description on training vectors.

    ``C`` must lie in ``[1/K, 1]``. ``C = 1/K`` has the closed-form uniform
    solution; larger ``C`` runs the pairwise mass-transfer solver until the
    stationarity gap drops below ``tol`` (default much tighter than the
    1e-6 contract so that training points stay inside the limit).

    Support vectors with ``alpha <= 1e-9`` are pruned and the remaining
    weights renormalized; the density limit is the objective of the pruned
    model.
    """
    X = _as_matrix(X_T)
    K = np.exp(-gamma * _sq_dists(X, X))
    alpha, report = _fit_from_gram(K, C, tol, max_iter)
    keep = alpha > SUPPORT_PRUNE_TOL
    if keep.all():
        sv = X
        limit = float(alpha @ K @ alpha)
    else:
        alpha = alpha[keep]
        alpha = alpha / alpha.sum()
        sv = X[keep]
        limit = float(alpha @ K[np.ix_(keep, keep)] @ alpha)
    report.objective = limit
    model = SvddModel(support_vectors=sv, alpha=alpha, gamma=gamma, C=C,
                      density_limit=limit, representation_tag=representation_tag)
    return model, report


def density(model: SvddModel, x) -> float:
    """Kernel density of one query under the fitted description."""
    return float(densities(model, np.asarray(x)[None, :])[0])


def densities(model: SvddModel, X) -> np.ndarray:
    """Vectorized kernel densities for a batch of query rows."""
    Q = _as_matrix(X)
    if Q.shape[1] != model.support_vectors.shape[1]:
        raise ValueError("query dimension does not match support vectors")
    return np.exp(-model.gamma * _sq_dists(Q, model.support_vectors)) @ model.alpha


def decide(model: SvddModel, x) -> int:
    """0 (healthy) when the density reaches the limit, else 1 (abnormal).

    Ties count as healthy; the comparison carries a 1e-9 absolute slack
    toward healthy (see ``DECISION_SLACK``).
    """
    return int(decide_batch(model, np.asarray(x)[None, :])[0])


def decide_batch(model: SvddModel, X, limit: float | None = None) -> np.ndarray:
    """Batch decisions against ``limit`` (default: the model's density limit)."""
    if limit is None:
        limit = model.density_limit
    d = densities(model, X)
    return (d < limit - DECISION_SLACK).astype(np.int64)


def correct_density_limit(model: SvddModel, X_T, X_V) -> tuple[float, float]:
    """Populate ``corrected_limit = D - m_T + m_V`` from reference sets.

    ``m_T``/``m_V`` are the mean densities of the training and validation
    sets under the fitted model. Returns ``(m_T, m_V)``.
    """
    m_t = float(densities(model, X_T).mean())
    m_v = float(densities(model, X_V).mean())
    model.corrected_limit = model.density_limit - m_t + m_v
    return m_t, m_v


def select_gamma(fit_fn, X_T, X_V, epsilon: float, grid=None) -> float:
    """Largest grid value whose fitted model flags at most ``epsilon`` of
    the validation set.

    ``fit_fn(X_T, gamma)`` must return a fitted :class:`SvddModel`. The grid
    must be nonempty and ascending. If every grid value over-flags, the
    smallest one is returned with a warning.
    """
    if grid is None:
        grid = DEFAULT_GAMMA_GRID
    grid = list(grid)
    if not grid:
        raise ValueError("empty gamma grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma grid must be sorted ascending")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    V = _as_matrix(X_V)
    for g in reversed(grid):
        model = fit_fn(X_T, g)
        frac = float(decide_batch(model, V).mean())
        if frac <= epsilon:
            return g
    warnings.warn("no gamma on the grid met the flag-rate target; "
                  "falling back to the smallest value", RuntimeWarning)
    return grid[0]


def _select_gamma_precomputed(d2_tt: np.ndarray, d2_vt: np.ndarray,
                              epsilon: float, grid, C: float,
                              tol: float = 1e-10, max_iter: int = 100_000):
    """Grid search reusing precomputed squared distances.

    Same selection rule as :func:`select_gamma`; returns
    ``(gamma, alpha, keep_mask, density_limit)`` for the chosen value so the
    caller can assemble a model without refitting.
    """
    grid = list(grid)

    def solve(g):
        K = np.exp(-g * d2_tt)
        alpha, _ = _fit_from_gram(K, C, tol, max_iter)
        keep = alpha > SUPPORT_PRUNE_TOL
        if keep.all():
            limit = float(alpha @ K @ alpha)
            return alpha, keep, limit
        a = alpha[keep] / alpha[keep].sum()
        limit = float(a @ K[np.ix_(keep, keep)] @ a)
        return a, keep, limit

    for g in reversed(grid):
        a, keep, limit = solve(g)
        dv = np.exp(-g * d2_vt[:, keep]) @ a
        frac = float(np.mean(dv < limit - DECISION_SLACK))
        if frac <= epsilon:
            return g, a, keep, limit
    warnings.warn("no gamma on the grid met the flag-rate target; "
                  "falling back to the smallest value", RuntimeWarning)
    g = grid[0]
    a, keep, limit = solve(g)
    return g, a, keep, limit


def fit_with_gamma_search(X_T, X_V, epsilon: float, grid=None, C: float = 1.0,
                          representation_tag: str = "raw",
                          tol: float = 1e-10, max_iter: int = 100_000):
    """Grid-select gamma on (train, validation), then assemble the model.

    Precomputes the squared-distance matrices once and reuses them across
    the grid, which is what makes per-fold calibration affordable. The
    corrected limit is populated from the same train/validation sets.
    Returns ``(model, gamma, m_T, m_V)``.
    """
    if grid is None:
        grid = DEFAULT_GAMMA_GRID
    T = _as_matrix(X_T)
    V = _as_matrix(X_V)
    d2_tt = _sq_dists(T, T)
    d2_vt = _sq_dists(V, T)
    gamma, alpha, keep, limit = _select_gamma_precomputed(
        d2_tt, d2_vt, epsilon, grid, C, tol=tol, max_iter=max_iter)
    model = SvddModel(support_vectors=T[keep], alpha=alpha, gamma=gamma, C=C,
                      density_limit=limit, representation_tag=representation_tag)
    m_t, m_v = correct_density_limit(model, T, V)
    return model, gamma, m_t, m_v


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _vectors_to_lists(X: np.ndarray) -> tuple[list, bool]:
    if np.iscomplexobj(X):
        inter = np.empty((X.shape[0], 2 * X.shape[1]))
        inter[:, 0::2] = X.real
        inter[:, 1::2] = X.imag
        return inter.tolist(), True
    return X.astype(np.float64).tolist(), False


def _vectors_from_lists(rows: list, is_complex: bool) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.float64)
    if is_complex:
        return arr[:, 0::2] + 1j * arr[:, 1::2]
    return arr


def svdd_to_dict(model: SvddModel) -> dict:
    sv, is_complex = _vectors_to_lists(model.support_vectors)
    doc = {
        "gamma": model.gamma,
        "C": model.C,
        "density_limit": model.density_limit,
        "alpha": model.alpha.tolist(),
        "support_vectors": sv,
        "complex": is_complex,
        "representation_tag": model.representation_tag,
    }
    if model.corrected_limit is not None:
        doc["corrected_limit"] = model.corrected_limit
    return doc


def svdd_from_dict(doc: dict) -> SvddModel:
    return SvddModel(
        support_vectors=_vectors_from_lists(doc["support_vectors"], doc["complex"]),
        alpha=np.asarray(doc["alpha"], dtype=np.float64),
        gamma=doc["gamma"],
        C=doc["C"],
        density_limit=doc["density_limit"],
        corrected_limit=doc.get("corrected_limit"),
        representation_tag=doc.get("representation_tag", "raw"),
    )


def save_svdd(path, model: SvddModel, extra: dict | None = None) -> None:
    doc = svdd_to_dict(model)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_svdd(path) -> SvddModel:
    with open(path) as fh:
        return svdd_from_dict(json.load(fh))

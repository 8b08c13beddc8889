"""Boundary estimation on autoencoder residuals with limit correction.

Instead of describing the raw data, the boundary is fitted to residuals
``r = x - H(x)`` of an autoencoder trained on healthy data only, so the
description concentrates on what deviates from healthy behaviour. A
validation set of healthy signals corrects the density limit for the
systematic bias the autoencoder introduces by fitting its training data
better than unseen data: ``D_m = D - m_T + m_V`` where ``m_T``/``m_V`` are
mean residual densities of the training/validation sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import complex_nn, svdd
from .complex_nn import ComplexAutoencoder
from .errors import DegenerateResiduals
from .svdd import DECISION_SLACK, SvddModel

RESIDUAL_VARIANCE_FLOOR = 1e-12


@dataclass
class ResidualDataset:
    residuals: np.ndarray
    source_ids: list
    representation_tag: str = "raw"


@dataclass
class FocusModel:
    autoencoder: ComplexAutoencoder
    svdd: SvddModel           # fitted on residuals; corrected_limit holds D_m
    m_T: float
    m_V: float
    representation_tag: str = "raw"


def residual(x, ae: ComplexAutoencoder) -> np.ndarray:
    """Reconstruction residual ``x - H(x)`` (vector or batch of rows)."""
    x = np.asarray(x)
    out = complex_nn.forward(ae, x)
    return x.astype(out.dtype) - out


def residual_norms(X, ae: ComplexAutoencoder) -> np.ndarray:
    r = residual(np.atleast_2d(np.asarray(X)), ae)
    return np.sqrt(np.sum(r.real**2 + r.imag**2, axis=1))


def fit_focus(X_T, X_V, ae: ComplexAutoencoder, gamma: float, C: float,
              representation_tag: str = "raw", tol: float = 1e-10,
              max_iter: int = 100_000) -> FocusModel:
    """Fit the description on training residuals and correct its limit.

    Raises :class:`DegenerateResiduals` when the training residuals have
    (near-)zero variance, which happens when the autoencoder memorized the
    training set exactly; no meaningful boundary exists in that case.
    """
    R_T = residual(np.atleast_2d(np.asarray(X_T)), ae)
    R_V = residual(np.atleast_2d(np.asarray(X_V)), ae)
    if R_V.shape[0] == 0:
        raise ValueError("validation set must be nonempty")
    spread = float(np.var(R_T.view(np.float64) if np.iscomplexobj(R_T) else R_T))
    if spread < RESIDUAL_VARIANCE_FLOOR:
        raise DegenerateResiduals(
            f"training residual variance {spread:.3e} below "
            f"{RESIDUAL_VARIANCE_FLOOR:g}; autoencoder memorized the data")
    model, _ = svdd.fit(R_T, gamma=gamma, C=C, tol=tol, max_iter=max_iter,
                        representation_tag=representation_tag)
    m_t, m_v = svdd.correct_density_limit(model, R_T, R_V)
    return FocusModel(autoencoder=ae, svdd=model, m_T=m_t, m_V=m_v,
                      representation_tag=representation_tag)


def decide_r(fm: FocusModel, x) -> int:
    """Decision against the uncorrected residual density limit ``D``."""
    return int(decide_r_batch(fm, np.asarray(x)[None, :])[0])


def decide_r_batch(fm: FocusModel, X) -> np.ndarray:
    r = residual(np.atleast_2d(np.asarray(X)), fm.autoencoder)
    return svdd.decide_batch(fm.svdd, r)


def decide_m(fm: FocusModel, x) -> int:
    """Decision against the corrected limit ``D_m``; ties are healthy."""
    return int(decide_m_batch(fm, np.asarray(x)[None, :])[0])


def decide_m_batch(fm: FocusModel, X) -> np.ndarray:
    if fm.svdd.corrected_limit is None:
        raise ValueError("model has no corrected limit")
    r = residual(np.atleast_2d(np.asarray(X)), fm.autoencoder)
    return svdd.decide_batch(fm.svdd, r, limit=fm.svdd.corrected_limit)


def norm_threshold(ae: ComplexAutoencoder, X_V, epsilon: float) -> float:
    """Nearest-rank ``(1 - epsilon)`` quantile of validation residual norms."""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    norms = residual_norms(X_V, ae)
    if norms.size == 0:
        raise ValueError("validation set must be nonempty")
    rank = max(1, int(np.ceil((1.0 - epsilon) * norms.size)))
    return float(np.sort(norms)[rank - 1])


def norm_baseline(ae: ComplexAutoencoder, X_V, X_Q, epsilon: float) -> np.ndarray:
    """Flag queries whose residual norm strictly exceeds the validation
    quantile threshold; roughly a fraction ``epsilon`` of the validation
    set itself ends up flagged."""
    thr = norm_threshold(ae, X_V, epsilon)
    return (residual_norms(X_Q, ae) > thr).astype(np.int64)


def fit_focus_with_gamma_search(X_T, X_V, ae: ComplexAutoencoder,
                                epsilon: float, grid=None, C: float = 1.0,
                                representation_tag: str = "raw"):
    """Select gamma on the residual sets, then :func:`fit_focus` with it.

    Returns ``(FocusModel, gamma)``.
    """
    if grid is None:
        grid = svdd.DEFAULT_GAMMA_GRID
    R_T = residual(np.atleast_2d(np.asarray(X_T)), ae)
    R_V = residual(np.atleast_2d(np.asarray(X_V)), ae)
    d2_tt = svdd._sq_dists(R_T, R_T)
    d2_vt = svdd._sq_dists(R_V, R_T)
    gamma, _, _, _ = svdd._select_gamma_precomputed(d2_tt, d2_vt, epsilon,
                                                    grid, C)
    fm = fit_focus(X_T, X_V, ae, gamma=gamma, C=C,
                   representation_tag=representation_tag)
    return fm, gamma


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def focus_to_dict(fm: FocusModel) -> dict:
    return {
        "kind": "focus",
        "ae": complex_nn.ae_to_dict(fm.autoencoder),
        "svdd": svdd.svdd_to_dict(fm.svdd),
        "m_T": fm.m_T,
        "m_V": fm.m_V,
        "representation_tag": fm.representation_tag,
    }


def focus_from_dict(doc: dict) -> FocusModel:
    return FocusModel(
        autoencoder=complex_nn.ae_from_dict(doc["ae"]),
        svdd=svdd.svdd_from_dict(doc["svdd"]),
        m_T=doc["m_T"],
        m_V=doc["m_V"],
        representation_tag=doc.get("representation_tag", "raw"),
    )


def save_focus(path, fm: FocusModel, extra: dict | None = None) -> None:
    doc = focus_to_dict(fm)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_focus(path) -> tuple[FocusModel, dict]:
    with open(path) as fh:
        doc = json.load(fh)
    known = ("kind", "ae", "svdd", "m_T", "m_V", "representation_tag")
    extras = {k: v for k, v in doc.items() if k not in known}
    return focus_from_dict(doc), extras


__all__ = [
    "ResidualDataset", "FocusModel", "residual", "residual_norms",
    "fit_focus", "decide_r", "decide_r_batch", "decide_m", "decide_m_batch",
    "norm_threshold", "norm_baseline", "focus_to_dict", "focus_from_dict",
    "save_focus", "load_focus", "DECISION_SLACK",
]

"""Metrics, k-fold protocol, and the representation/decision ablation grid.

Representations: standardized real sweep, instantaneous amplitude, and the
analytic signal under each complex activation. Decisions: residual-norm
threshold, plain data description (with and without the corrected limit),
and the residual-focused description (with and without the corrected
limit). Each cell is trained and calibrated per fold; the per-fold scores
feed the same metric set reported in the ablation tables.

Score orientation: density-based decisions score with the negated density
(lower density = more abnormal); the norm baseline scores with the residual
norm itself.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import complex_nn, focus_svdd, svdd
from .complex_nn import TrainConfig
from .dataio import SignalDataset
from .signal_repr import analytic_signal

REPRESENTATIONS = ("real", "amplitude", "analytic_crelu", "analytic_modrelu",
                   "analytic_ead")
DECISIONS = ("norm", "svdd", "svdd_dm", "focus_r", "focus_m")

_REP_ACTIVATION = {
    "real": "relu",
    "amplitude": "relu",
    "analytic_crelu": "crelu",
    "analytic_modrelu": "modrelu",
    "analytic_ead": "ead",
}

METRIC_NAMES = ("f1", "accuracy", "auc", "precision", "recall")


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    f1: float
    accuracy: float
    auc: float | None
    precision: float
    recall: float

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def auc_score(y_true, scores) -> float:
    """Rank-based AUC with midranks for ties; higher score = more abnormal."""
    y = np.asarray(y_true, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    pos = int(y.sum())
    neg = y.size - pos
    if pos == 0 or neg == 0:
        raise ValueError("AUC needs both classes present")
    order = np.sort(s)
    lo = np.searchsorted(order, s, side="left")
    hi = np.searchsorted(order, s, side="right")
    midranks = (lo + hi + 1) / 2.0
    return float((midranks[y == 1].sum() - pos * (pos + 1) / 2.0) / (pos * neg))


def compute_metrics(y_true, y_pred, scores=None) -> Metrics:
    """Confusion-matrix metrics with abnormal (1) as the positive class.

    AUC is computed from ``scores`` when both classes are present,
    otherwise reported as None. Zero-denominator precision/recall/F1
    default to 0.
    """
    y = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if y.shape != p.shape or y.ndim != 1 or y.size == 0:
        raise ValueError("label vectors must be equal-length and nonempty")
    if not (np.isin(y, (0, 1)).all() and np.isin(p, (0, 1)).all()):
        raise ValueError("labels must be 0 (healthy) or 1 (abnormal)")
    tp = int(np.sum((y == 1) & (p == 1)))
    fp = int(np.sum((y == 0) & (p == 1)))
    fn = int(np.sum((y == 1) & (p == 0)))
    tn = int(np.sum((y == 0) & (p == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / y.size
    auc = None
    if scores is not None and 0 < y.sum() < y.size:
        auc = auc_score(y, scores)
    return Metrics(f1=f1, accuracy=accuracy, auc=auc, precision=precision,
                   recall=recall)


# ---------------------------------------------------------------------------
# Fold plan
# ---------------------------------------------------------------------------


@dataclass
class FoldPlan:
    """Per-fold healthy index sets; the abnormal set is shared by all folds."""

    n_folds: int
    folds: list[dict]  # {"train": idx, "val": idx, "test": idx}

    @classmethod
    def build(cls, n_healthy: int, n_folds: int = 5, seed: int = 0) -> "FoldPlan":
        if n_folds < 3:
            raise ValueError("need at least 3 folds (train/val/test chunks)")
        if n_healthy < n_folds:
            raise ValueError("not enough healthy samples for the fold count")
        perm = np.random.default_rng(seed).permutation(n_healthy)
        chunks = np.array_split(perm, n_folds)
        folds = []
        for i in range(n_folds):
            test = chunks[i]
            val = chunks[(i + 1) % n_folds]
            train = np.concatenate(
                [chunks[j] for j in range(n_folds) if j not in (i, (i + 1) % n_folds)])
            folds.append({"train": train, "val": val, "test": test})
        return cls(n_folds=n_folds, folds=folds)


# ---------------------------------------------------------------------------
# Ablation grid
# ---------------------------------------------------------------------------


@dataclass
class AblationSpec:
    representations: tuple = REPRESENTATIONS
    decisions: tuple = DECISIONS
    train: TrainConfig = field(default_factory=lambda: TrainConfig(
        epochs=40, batch_size=32, learning_rate=2e-3, seed=0))
    epsilon: float = 0.05
    C: float = 1.0
    gamma_grid: tuple = svdd.DEFAULT_GAMMA_GRID
    hidden: tuple = complex_nn.DEFAULT_HIDDEN
    seed: int = 0

    def __post_init__(self):
        for r in self.representations:
            if r not in REPRESENTATIONS:
                raise ValueError(f"unknown representation {r!r}")
        for d in self.decisions:
            if d not in DECISIONS:
                raise ValueError(f"unknown decision {d!r}")


@dataclass
class CellResult:
    representation: str
    decision: str
    fold_metrics: list  # Metrics or None per fold
    fold_errors: list   # str or None per fold
    fold_gammas: list   # float or None per fold
    failed: bool = False
    mean: dict | None = None
    std: dict | None = None


@dataclass
class EvalReport:
    cells: list[CellResult]
    metadata: dict


def _derive_seeds(master: int, rep_idx: int, fold: int) -> tuple[int, int]:
    ss = np.random.SeedSequence([int(master), int(rep_idx), int(fold)])
    a, b = ss.generate_state(2)
    return int(a), int(b)


def _err_string(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _run_rep_fold(rep: str, arrays: dict, spec: AblationSpec, rep_idx: int,
                  fold: int) -> dict:
    """All decision outputs for one representation on one fold.

    Each stage (raw description, autoencoder, residual description) fails
    independently: a training failure takes down only the cells that need
    the autoencoder. Per decision the result maps to ``(y_pred, scores)``
    or an ``"error"`` entry.
    """
    init_seed, train_seed = _derive_seeds(spec.seed, rep_idx, fold)
    tr, va, te_h, te_a = (arrays["train"], arrays["val"], arrays["test"],
                          arrays["abnormal"])
    q = np.vstack([te_h, te_a])
    y_true = np.concatenate([np.zeros(len(te_h), dtype=np.int64),
                             np.ones(len(te_a), dtype=np.int64)])
    out = {"y_true": y_true, "gamma": {}, "errors": {}}

    need_ae = any(d in spec.decisions for d in ("norm", "focus_r", "focus_m"))
    need_raw = any(d in spec.decisions for d in ("svdd", "svdd_dm"))
    need_focus = any(d in spec.decisions for d in ("focus_r", "focus_m"))

    if need_raw:
        try:
            model, gamma, _, _ = svdd.fit_with_gamma_search(
                tr, va, spec.epsilon, spec.gamma_grid, spec.C,
                representation_tag=rep)
            dq = svdd.densities(model, q)
            out["gamma"]["svdd"] = gamma
            out["gamma"]["svdd_dm"] = gamma
            if "svdd" in spec.decisions:
                out["svdd"] = ((dq < model.density_limit
                                - svdd.DECISION_SLACK).astype(np.int64), -dq)
            if "svdd_dm" in spec.decisions:
                out["svdd_dm"] = ((dq < model.corrected_limit
                                   - svdd.DECISION_SLACK).astype(np.int64), -dq)
        except Exception as exc:  # noqa: BLE001 - cell isolation
            for dec in ("svdd", "svdd_dm"):
                out["errors"][dec] = _err_string(exc)

    ae = None
    if need_ae:
        try:
            ae = complex_nn.build_autoencoder(
                tr.shape[1], activation=_REP_ACTIVATION[rep],
                hidden=spec.hidden, seed=init_seed)
            cfg = dataclasses.replace(spec.train, seed=train_seed)
            ae = complex_nn.train(ae, tr, cfg)
        except Exception as exc:  # noqa: BLE001 - cell isolation
            ae = None
            for dec in ("norm", "focus_r", "focus_m"):
                out["errors"][dec] = _err_string(exc)
    if ae is not None and "norm" in spec.decisions:
        try:
            thr = focus_svdd.norm_threshold(ae, va, spec.epsilon)
            scores = focus_svdd.residual_norms(q, ae)
            out["norm"] = ((scores > thr).astype(np.int64), scores)
        except Exception as exc:  # noqa: BLE001 - cell isolation
            out["errors"]["norm"] = _err_string(exc)
    if ae is not None and need_focus:
        try:
            fm, gamma = focus_svdd.fit_focus_with_gamma_search(
                tr, va, ae, spec.epsilon, spec.gamma_grid, spec.C,
                representation_tag=rep)
            dq = svdd.densities(fm.svdd, focus_svdd.residual(q, ae))
            out["gamma"]["focus_r"] = gamma
            out["gamma"]["focus_m"] = gamma
            if "focus_r" in spec.decisions:
                out["focus_r"] = ((dq < fm.svdd.density_limit
                                   - svdd.DECISION_SLACK).astype(np.int64), -dq)
            if "focus_m" in spec.decisions:
                out["focus_m"] = ((dq < fm.svdd.corrected_limit
                                   - svdd.DECISION_SLACK).astype(np.int64), -dq)
        except Exception as exc:  # noqa: BLE001 - cell isolation
            for dec in ("focus_r", "focus_m"):
                out["errors"][dec] = _err_string(exc)
    return out


def _fold_arrays(healthy, abnormal, fold_idx_sets) -> dict:
    """Standardize on the fold's training split, then derive all three
    representations for every split."""
    from .signal_repr import instantaneous_amplitude_array

    tr_raw = healthy[fold_idx_sets["train"]]
    mean = float(tr_raw.mean())
    std = float(tr_raw.std())
    if std <= 0.0:
        raise ValueError("zero variance in fold training data")
    splits = {
        "train": tr_raw,
        "val": healthy[fold_idx_sets["val"]],
        "test": healthy[fold_idx_sets["test"]],
        "abnormal": abnormal,
    }
    reps: dict[str, dict] = {"real": {}, "amplitude": {}, "analytic": {}}
    for name, raw in splits.items():
        x = (raw - mean) / std
        xh = analytic_signal(x)
        reps["real"][name] = x
        reps["amplitude"][name] = instantaneous_amplitude_array(xh)
        reps["analytic"][name] = xh
    return reps


def run_ablation(dataset: SignalDataset, plan: FoldPlan | None,
                 spec: AblationSpec, jobs: int = 1) -> EvalReport:
    """Train and evaluate every (representation, decision) cell per fold.

    Per-cell failures are recorded and do not stop other cells. Reports are
    deterministic for fixed seeds regardless of ``jobs``.
    """
    labels = dataset.labels
    healthy = np.asarray(dataset.signals[labels == "healthy"], dtype=np.float64)
    abnormal = np.asarray(dataset.signals[labels == "abnormal"], dtype=np.float64)
    if healthy.shape[0] == 0 or abnormal.shape[0] == 0:
        raise ValueError("dataset needs both healthy and abnormal signals")
    if plan is None:
        plan = FoldPlan.build(healthy.shape[0], seed=spec.seed)

    tasks = [(rep, fold) for rep in spec.representations
             for fold in range(plan.n_folds)]

    def run_task(task):
        rep, fold = task
        rep_idx = REPRESENTATIONS.index(rep)
        try:
            arrays_by_kind = _fold_arrays(healthy, abnormal, plan.folds[fold])
            kind = "analytic" if rep.startswith("analytic") else rep
            result = _run_rep_fold(rep, arrays_by_kind[kind], spec, rep_idx, fold)
            return task, result, None
        except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
            return task, None, f"{type(exc).__name__}: {exc}"

    results: dict = {}
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for task, result, err in pool.map(run_task, tasks):
                results[task] = (result, err)
    else:
        for task in tasks:
            task, result, err = run_task(task)
            results[task] = (result, err)

    cells = []
    for rep in spec.representations:
        for dec in spec.decisions:
            fold_metrics, fold_errors, fold_gammas = [], [], []
            for fold in range(plan.n_folds):
                result, err = results[(rep, fold)]
                if err is None and result is not None:
                    err = result["errors"].get(dec)
                if err is not None:
                    fold_metrics.append(None)
                    fold_errors.append(err)
                    fold_gammas.append(None)
                    continue
                y_pred, scores = result[dec]
                fold_metrics.append(compute_metrics(result["y_true"], y_pred,
                                                    scores))
                fold_errors.append(None)
                fold_gammas.append(result["gamma"].get(dec))
            failed = any(e is not None for e in fold_errors)
            mean = std = None
            if not failed:
                mean, std = _aggregate(fold_metrics)
            cells.append(CellResult(representation=rep, decision=dec,
                                    fold_metrics=fold_metrics,
                                    fold_errors=fold_errors,
                                    fold_gammas=fold_gammas,
                                    failed=failed, mean=mean, std=std))
    metadata = {
        "seed": spec.seed,
        "epsilon": spec.epsilon,
        "C": spec.C,
        "n_folds": plan.n_folds,
        "gamma_grid": list(spec.gamma_grid),
        "train": dataclasses.asdict(spec.train),
        "score_orientation": "higher score = more abnormal; density-based "
                             "decisions use -density, norm uses residual norm",
    }
    return EvalReport(cells=cells, metadata=metadata)


def _aggregate(fold_metrics: list[Metrics]) -> tuple[dict, dict]:
    mean, std = {}, {}
    for name in METRIC_NAMES:
        vals = [getattr(m, name) for m in fold_metrics]
        vals = [v for v in vals if v is not None]
        if vals:
            mean[name] = float(np.mean(vals))
            std[name] = float(np.std(vals))
        else:
            mean[name] = None
            std[name] = None
    return mean, std


# ---------------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------------


def report_to_dict(report: EvalReport) -> dict:
    cells = []
    for c in report.cells:
        cells.append({
            "representation": c.representation,
            "decision": c.decision,
            "failed": c.failed,
            "mean": c.mean,
            "std": c.std,
            "folds": [m.as_dict() if m is not None else None
                      for m in c.fold_metrics],
            "fold_errors": c.fold_errors,
            "fold_gammas": c.fold_gammas,
        })
    return {"metadata": report.metadata, "cells": cells}


def report_to_csv(report: EvalReport) -> str:
    cols = ["representation", "decision"]
    for name in METRIC_NAMES:
        cols += [f"{name}_mean", f"{name}_std"]
    lines = [",".join(cols)]
    for c in report.cells:
        row = [c.representation, c.decision]
        for name in METRIC_NAMES:
            if c.failed or c.mean is None or c.mean.get(name) is None:
                row += ["", ""]
            else:
                row += [repr(c.mean[name]), repr(c.std[name])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def save_report(report: EvalReport, json_path, csv_path) -> None:
    with open(json_path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=1)
    with open(csv_path, "w") as fh:
        fh.write(report_to_csv(report))

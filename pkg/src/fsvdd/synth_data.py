"""Synthetic sweep generator: superposed cosines, condition clusters, defects.

A sweep is a weighted sum of cosines ``sum_n a_n cos(w_n t + phi_n)`` plus
white Gaussian noise; each term stands for one reflecting element whose
frequency encodes round-trip delay and whose weight encodes reflectivity.
Healthy data comes from a handful of operating-condition clusters (base
target sets with jitter). Abnormal sweeps take a healthy draw and scale the
reflectivity of one designated target, leaving its frequency and phase
untouched; a delay-shift defect mode (scaling the frequency instead) is
available for robustness studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .dataio import SignalDataset

DEFAULT_L = 1501


@dataclass
class Target:
    """One reflecting element: weight ``a``, angular frequency ``w`` in
    rad/sample, phase ``phi``."""

    a: float
    w: float
    phi: float

    def __post_init__(self):
        if self.a < 0.0:
            raise ValueError("target weight must be nonnegative")
        if not 0.0 < self.w < math.pi:
            raise ValueError("target frequency must lie in (0, pi)")


@dataclass
class DefectSpec:
    target_index: int = 1
    factor_range: tuple[float, float] = (2.0, 3.0)
    mode: str = "reflectivity"  # or "delay"

    def __post_init__(self):
        lo, hi = self.factor_range
        if lo > hi:
            raise ValueError("factor range must be ordered")
        if self.mode not in ("reflectivity", "delay"):
            raise ValueError(f"unknown defect mode {self.mode!r}")


@dataclass
class ClusterSpec:
    """Base target set for one operating condition plus jitter scales."""

    targets: list[Target]
    jitter_a: float = 0.0
    jitter_w: float = 0.0
    jitter_phi: float = 0.0


@dataclass
class Counts:
    train: int = 318
    val: int = 106
    test_healthy: int = 106
    test_abnormal: int = 362

    def __post_init__(self):
        for name, v in asdict(self).items():
            if v < 0:
                raise ValueError(f"count {name} must be nonnegative")
        if min(self.train, self.val, self.test_healthy) == 0:
            raise ValueError("healthy split counts must be positive")


@dataclass
class GeneratorConfig:
    L: int = DEFAULT_L
    clusters: list[ClusterSpec] = field(default_factory=list)
    defect: DefectSpec = field(default_factory=DefectSpec)
    noise_sigma: float = 0.05
    counts: Counts = field(default_factory=Counts)
    seed: int = 7

    def __post_init__(self):
        if self.noise_sigma < 0.0:
            raise ValueError("noise sigma must be nonnegative")
        if not self.clusters:
            self.clusters = default_clusters()
        if len(self.clusters) < 1:
            raise ValueError("need at least one cluster")


def default_clusters() -> list[ClusterSpec]:
    """Three operating conditions, three targets each.

    The strongest target is the front-face reflection; the second is the
    subsurface reflection whose reflectivity the default defect perturbs.
    Frequencies shift per cluster (different stand-off distances) and are
    absolute rad/sample constants, valid for any sweep length. The sub-bin
    frequency jitter makes the raw sweeps spread out strongly in Euclidean
    distance while staying on a low-dimensional manifold.
    """
    base = 2.0 * math.pi / DEFAULT_L
    clusters = []
    for c in range(3):
        targets = [
            Target(a=1.0, w=base * (20.0 + 6.0 * c), phi=0.4 + 0.7 * c),
            Target(a=0.25, w=base * (46.0 + 6.0 * c), phi=1.1 + 0.5 * c),
            Target(a=0.12, w=base * (71.0 + 6.0 * c), phi=2.3 + 0.3 * c),
        ]
        clusters.append(ClusterSpec(targets=targets, jitter_a=0.05,
                                    jitter_w=base * 0.08, jitter_phi=0.3))
    return clusters


def default_config(seed: int = 7) -> GeneratorConfig:
    return GeneratorConfig(seed=seed)


def synth_signal(targets: list[Target], L: int, noise_sigma: float,
                 rng: np.random.Generator) -> np.ndarray:
    """One sweep: ``sum_n a_n cos(w_n t + phi_n)`` plus N(0, sigma^2) noise."""
    if not targets:
        raise ValueError("need at least one target")
    t = np.arange(L, dtype=np.float64)
    x = np.zeros(L)
    for tg in targets:
        x += tg.a * np.cos(tg.w * t + tg.phi)
    return x + rng.normal(0.0, noise_sigma, L)


def jitter_targets(cluster: ClusterSpec, rng: np.random.Generator) -> list[Target]:
    """Draw one jittered instance of a cluster's target set."""
    out = []
    for tg in cluster.targets:
        a = max(0.0, tg.a + rng.normal(0.0, cluster.jitter_a))
        w = float(np.clip(tg.w + rng.normal(0.0, cluster.jitter_w),
                          1e-9, math.pi - 1e-9))
        phi = tg.phi + rng.normal(0.0, cluster.jitter_phi)
        out.append(Target(a=a, w=w, phi=phi))
    return out


def apply_defect(targets: list[Target], defect: DefectSpec,
                 rng: np.random.Generator) -> tuple[list[Target], float]:
    """Perturb the designated target; returns the new set and the factor."""
    lo, hi = defect.factor_range
    factor = float(rng.uniform(lo, hi))
    out = []
    for i, tg in enumerate(targets):
        if i == defect.target_index % len(targets):
            if defect.mode == "reflectivity":
                out.append(Target(a=tg.a * factor, w=tg.w, phi=tg.phi))
            else:
                w = float(np.clip(tg.w * factor, 1e-9, math.pi - 1e-9))
                out.append(Target(a=tg.a, w=w, phi=tg.phi))
        else:
            out.append(tg)
    return out, factor


def generate(cfg: GeneratorConfig) -> SignalDataset:
    """Draw the four splits; deterministic per seed.

    Healthy signals cycle round-robin over the clusters. Abnormal signals
    exist only in the test split: each takes a fresh healthy draw and
    applies the defect perturbation. Each split consumes an independent
    substream of the master seed, so splits are disjoint by construction
    and individually reproducible.
    """
    streams = [np.random.default_rng(s)
               for s in np.random.SeedSequence(cfg.seed).spawn(4)]
    split_plan = [
        ("train", cfg.counts.train, False, streams[0]),
        ("val", cfg.counts.val, False, streams[1]),
        ("test", cfg.counts.test_healthy, False, streams[2]),
        ("test", cfg.counts.test_abnormal, True, streams[3]),
    ]
    rows, meta = [], []
    idx = 0
    for split, count, is_defect, rng in split_plan:
        for i in range(count):
            cluster_id = i % len(cfg.clusters)
            targets = jitter_targets(cfg.clusters[cluster_id], rng)
            entry_meta = {"split": split, "cluster": cluster_id}
            if is_defect:
                targets, factor = apply_defect(targets, cfg.defect, rng)
                entry_meta["defect_factor"] = factor
            rows.append(synth_signal(targets, cfg.L, cfg.noise_sigma, rng))
            meta.append({
                "id": f"s{idx:05d}",
                "label": "abnormal" if is_defect else "healthy",
                "fold": None,
                "meta": entry_meta,
            })
            idx += 1
    signals = np.stack(rows) if rows else np.zeros((0, cfg.L))
    return SignalDataset(signals=signals, meta=meta, representation="raw")


# -- config (de)serialization for CLI/manifest use --------------------------


def config_to_dict(cfg: GeneratorConfig) -> dict:
    return {
        "L": cfg.L,
        "clusters": [
            {
                "targets": [asdict(t) for t in c.targets],
                "jitter_a": c.jitter_a,
                "jitter_w": c.jitter_w,
                "jitter_phi": c.jitter_phi,
            }
            for c in cfg.clusters
        ],
        "defect": {
            "target_index": cfg.defect.target_index,
            "factor_range": list(cfg.defect.factor_range),
            "mode": cfg.defect.mode,
        },
        "noise_sigma": cfg.noise_sigma,
        "counts": asdict(cfg.counts),
        "seed": cfg.seed,
    }


def config_from_dict(doc: dict) -> GeneratorConfig:
    kwargs = {}
    if "L" in doc:
        kwargs["L"] = int(doc["L"])
    if "clusters" in doc:
        kwargs["clusters"] = [
            ClusterSpec(
                targets=[Target(**t) for t in c["targets"]],
                jitter_a=c.get("jitter_a", 0.0),
                jitter_w=c.get("jitter_w", 0.0),
                jitter_phi=c.get("jitter_phi", 0.0),
            )
            for c in doc["clusters"]
        ]
    if "defect" in doc:
        d = doc["defect"]
        kwargs["defect"] = DefectSpec(
            target_index=d.get("target_index", 1),
            factor_range=tuple(d.get("factor_range", (1.5, 2.0))),
            mode=d.get("mode", "reflectivity"),
        )
    if "noise_sigma" in doc:
        kwargs["noise_sigma"] = float(doc["noise_sigma"])
    if "counts" in doc:
        kwargs["counts"] = Counts(**doc["counts"])
    if "seed" in doc:
        kwargs["seed"] = int(doc["seed"])
    return GeneratorConfig(**kwargs)

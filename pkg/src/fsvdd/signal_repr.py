"""Sweep representations: standardized real signal, analytic signal, amplitude.

A radar sweep arrives as a real vector of length ``L``. Three views of it
feed the detection pipeline:

* the standardized real signal,
* its analytic (complex) extension with negative frequencies removed,
* the instantaneous amplitude, i.e. the modulus of the analytic signal.

Array-level functions operate on 1-D vectors or 2-D row-stacked batches;
the thin wrappers at the bottom work on :class:`IFSignal` containers and
preserve labels/metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_LENGTH = 1501

LABELS = ("healthy", "abnormal", "unknown")


@dataclass(frozen=True, eq=False)
class IFSignal:
    """One real-valued sweep with a label and free-form metadata."""

    samples: np.ndarray
    label: str = "unknown"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("signal samples must be a 1-D vector")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal contains non-finite samples")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class AnalyticSignal:
    """Complex counterpart of an :class:`IFSignal` (negative spectrum removed)."""

    samples: np.ndarray
    label: str = "unknown"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise ValueError("signal samples must be a 1-D vector")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class Standardizer:
    """Global scalar mean/std estimated from healthy sweeps.

    ``mean``/``std`` are scalars in the default (pooled) mode or per-bin
    vectors when fitted with ``per_bin=True``.
    """

    mean: float | np.ndarray
    std: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.std) <= 0.0):
            raise ValueError("standardizer std must be positive")

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def invert(self, x: np.ndarray) -> np.ndarray:
        return x * self.std + self.mean


def fit_standardizer(healthy: list[IFSignal], per_bin: bool = False) -> Standardizer:
    """Estimate standardization statistics from healthy sweeps.

    Statistics are pooled over every sample of every signal (global scalar
    mean/std). With ``per_bin=True`` they are computed per time bin instead.

    Raises
    ------
    ValueError
        If the input is empty or the pooled variance is zero.
    """
    if len(healthy) == 0:
        raise ValueError("need at least one healthy signal")
    stacked = np.stack([np.asarray(s.samples if isinstance(s, IFSignal) else s,
                                   dtype=np.float64) for s in healthy])
    if per_bin:
        mean = stacked.mean(axis=0)
        std = stacked.std(axis=0)
        if np.any(std <= 0.0):
            raise ValueError("zero variance in at least one time bin")
        return Standardizer(mean=mean, std=std)
    mean = float(stacked.mean())
    std = float(stacked.std())
    if std <= 0.0:
        raise ValueError("pooled variance of healthy signals is zero")
    return Standardizer(mean=mean, std=std)


def standardize(x: IFSignal, s: Standardizer) -> IFSignal:
    """Apply ``(x - mean)/std`` elementwise; label and meta carry over."""
    return IFSignal(samples=s.apply(x.samples), label=x.label, meta=dict(x.meta))


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """Analytic extension of a real signal via the DFT construction.

    Keeps the DC bin (and the Nyquist bin for even length), doubles the
    strictly positive-frequency bins, zeroes the negative-frequency bins,
    and inverse transforms. The real part of the result equals the input
    up to round-off.

    Parameters
    ----------
    x : np.ndarray
        Real 1-D signal of length >= 2, or a 2-D batch of row signals.

    Returns
    -------
    np.ndarray
        Complex array of the same shape.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    L = x.shape[-1]
    if L < 2:
        raise ValueError("analytic signal needs length >= 2")
    spec = np.fft.fft(x, axis=-1)
    h = np.zeros(L)
    if L % 2 == 0:
        h[0] = 1.0
        h[L // 2] = 1.0
        h[1 : L // 2] = 2.0
    else:
        h[0] = 1.0
        h[1 : (L + 1) // 2] = 2.0
    return np.fft.ifft(spec * h, axis=-1)


def instantaneous_amplitude_array(xh: np.ndarray) -> np.ndarray:
    """Elementwise modulus of an analytic signal (nonnegative)."""
    return np.abs(np.asarray(xh, dtype=np.complex128))


def analytic(x: IFSignal) -> AnalyticSignal:
    """Analytic representation of a sweep; see :func:`analytic_signal`."""
    return AnalyticSignal(samples=analytic_signal(x.samples), label=x.label,
                          meta=dict(x.meta))


def instantaneous_amplitude(xh: AnalyticSignal) -> IFSignal:
    """Instantaneous amplitude of an analytic signal."""
    return IFSignal(samples=instantaneous_amplitude_array(xh.samples),
                    label=xh.label, meta=dict(xh.meta))

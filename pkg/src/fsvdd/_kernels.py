"""Hot numeric kernels with numba and pure-numpy implementations.

Each public name is bound at import time to the numba-compiled version or
the numpy fallback depending on :mod:`fsvdd._backend`. Both variants apply
the same update rules in the same order, so results agree to floating-point
round-off; ``benchmarks/bench_kernels.py`` compares their throughput.

Conventions used throughout:

* complex batches are C-contiguous ``(rows, nodes)`` complex128 arrays;
* activation parameters ``b`` arrive as a ``(nodes,)`` float64 array
  (callers broadcast a per-layer scalar beforehand);
* packed gradients store d/d(real part) in the real component and
  d/d(imag part) in the imaginary component.
"""

from __future__ import annotations

import numpy as np

from ._backend import NUMBA_ENABLED

# ---------------------------------------------------------------------------
# Capped-simplex quadratic minimization (greedy pairwise mass transfer).
#
# Minimizes a'Ka subject to sum(a) = 1, 0 <= a_k <= C. Each step moves mass
# from the coordinate with the largest gradient (among those that can shrink)
# to the one with the smallest gradient (among those that can grow); the
# stationarity gap max-min of those gradients is the stopping criterion.
# ---------------------------------------------------------------------------


def _smo_solve_np(K, C, tol, max_iter):
    n = K.shape[0]
    alpha = np.full(n, 1.0 / n)
    g = 2.0 * (K @ alpha)
    it = 0
    gap = 0.0
    while it < max_iter:
        gi = np.where(alpha > 0.0, g, -np.inf)
        i = int(np.argmax(gi))
        gj = np.where(alpha < C, g, np.inf)
        j = int(np.argmin(gj))
        if not np.isfinite(gj[j]):
            gap = 0.0
            break
        gap = g[i] - g[j]
        if gap <= tol:
            break
        dmax = min(alpha[i], C - alpha[j])
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad > 0.0:
            delta = min(dmax, gap / (2.0 * quad))
        else:
            delta = dmax
        alpha[i] -= delta
        alpha[j] += delta
        g += (2.0 * delta) * (K[:, j] - K[:, i])
        it += 1
        if it % 1024 == 0:
            g = 2.0 * (K @ alpha)  # refresh against incremental drift
    return alpha, it, max(gap, 0.0)


def _ead_fwd_np(z, b):
    r = np.abs(z)
    emb = np.exp(-b * r * r)
    safe_r = np.where(r > 0.0, r, 1.0)
    out = (((1.0 - emb) / safe_r) * (r > 0.0)) * z
    return out, r, emb


def _ead_bwd_np(gout, z, r, emb, b):
    nz = r > 0.0
    safe_r = np.where(nz, r, 1.0)
    f = 1.0 - emb
    fp = 2.0 * b * r * emb
    a0 = np.where(nz, f / safe_r, 0.0)
    a1 = np.where(nz, (fp - a0) / (safe_r * safe_r), 0.0)
    zre, zim = z.real, z.imag
    gre, gim = gout.real, gout.imag
    cross = a1 * zre * zim
    gz = (gre * (a0 + a1 * zre * zre) + gim * cross) + 1j * (
        gre * cross + gim * (a0 + a1 * zim * zim)
    )
    gb = ((gre * zre + gim * zim) * r * emb).sum(axis=0)
    return gz, gb


def _modrelu_fwd_np(z, b):
    r = np.abs(z)
    scale = np.where(r > b, 1.0 - b / np.where(r > 0.0, r, 1.0), 0.0)
    return scale * z, r


def _modrelu_bwd_np(gout, z, r, b):
    on = r > b
    safe_r = np.where(r > 0.0, r, 1.0)
    s = np.where(on, 1.0 - b / safe_r, 0.0)
    a1 = np.where(on, b / (safe_r * safe_r * safe_r), 0.0)
    zre, zim = z.real, z.imag
    gre, gim = gout.real, gout.imag
    cross = a1 * zre * zim
    gz = (gre * (s + a1 * zre * zre) + gim * cross) + 1j * (
        gre * cross + gim * (s + a1 * zim * zim)
    )
    gb = -(on * (gre * zre + gim * zim) / safe_r).sum(axis=0)
    return gz, gb


if NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True, nogil=True)
    def _smo_solve_nb(K, C, tol, max_iter):  # pragma: no cover - jit
        n = K.shape[0]
        alpha = np.full(n, 1.0 / n)
        g = np.empty(n)
        for k in range(n):
            acc = 0.0
            for m in range(n):
                acc += K[k, m] * alpha[m]
            g[k] = 2.0 * acc
        it = 0
        gap = 0.0
        while it < max_iter:
            i = -1
            j = -1
            gi = -np.inf
            gj = np.inf
            for k in range(n):
                if alpha[k] > 0.0 and g[k] > gi:
                    gi = g[k]
                    i = k
                if alpha[k] < C and g[k] < gj:
                    gj = g[k]
                    j = k
            if j < 0:
                gap = 0.0
                break
            gap = g[i] - g[j]
            if gap <= tol:
                break
            dmax = min(alpha[i], C - alpha[j])
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if quad > 0.0:
                delta = min(dmax, gap / (2.0 * quad))
            else:
                delta = dmax
            alpha[i] -= delta
            alpha[j] += delta
            for k in range(n):
                g[k] += (2.0 * delta) * (K[k, j] - K[k, i])
            it += 1
            if it % 1024 == 0:
                for k in range(n):
                    acc = 0.0
                    for m in range(n):
                        acc += K[k, m] * alpha[m]
                    g[k] = 2.0 * acc
        if gap < 0.0:
            gap = 0.0
        return alpha, it, gap

    @njit(cache=True, nogil=True)
    def _ead_fwd_nb(z, b):  # pragma: no cover - jit
        m, n = z.shape
        out = np.zeros((m, n), dtype=np.complex128)
        r = np.empty((m, n))
        emb = np.empty((m, n))
        for i in range(m):
            for k in range(n):
                rv = abs(z[i, k])
                r[i, k] = rv
                e = np.exp(-b[k] * rv * rv)
                emb[i, k] = e
                if rv > 0.0:
                    out[i, k] = ((1.0 - e) / rv) * z[i, k]
        return out, r, emb

    @njit(cache=True, nogil=True)
    def _ead_bwd_nb(gout, z, r, emb, b):  # pragma: no cover - jit
        m, n = z.shape
        gz = np.zeros((m, n), dtype=np.complex128)
        gb = np.zeros(n)
        for i in range(m):
            for k in range(n):
                rv = r[i, k]
                if rv <= 0.0:
                    continue
                e = emb[i, k]
                f = 1.0 - e
                fp = 2.0 * b[k] * rv * e
                a0 = f / rv
                a1 = (fp - a0) / (rv * rv)
                zre = z[i, k].real
                zim = z[i, k].imag
                gre = gout[i, k].real
                gim = gout[i, k].imag
                cross = a1 * zre * zim
                gz[i, k] = complex(
                    gre * (a0 + a1 * zre * zre) + gim * cross,
                    gre * cross + gim * (a0 + a1 * zim * zim),
                )
                gb[k] += (gre * zre + gim * zim) * rv * e
        return gz, gb

    @njit(cache=True, nogil=True)
    def _modrelu_fwd_nb(z, b):  # pragma: no cover - jit
        m, n = z.shape
        out = np.zeros((m, n), dtype=np.complex128)
        r = np.empty((m, n))
        for i in range(m):
            for k in range(n):
                rv = abs(z[i, k])
                r[i, k] = rv
                if rv > b[k]:
                    out[i, k] = (1.0 - b[k] / rv) * z[i, k]
        return out, r

    @njit(cache=True, nogil=True)
    def _modrelu_bwd_nb(gout, z, r, b):  # pragma: no cover - jit
        m, n = z.shape
        gz = np.zeros((m, n), dtype=np.complex128)
        gb = np.zeros(n)
        for i in range(m):
            for k in range(n):
                rv = r[i, k]
                if rv <= b[k]:
                    continue
                s = 1.0 - b[k] / rv
                a1 = b[k] / (rv * rv * rv)
                zre = z[i, k].real
                zim = z[i, k].imag
                gre = gout[i, k].real
                gim = gout[i, k].imag
                cross = a1 * zre * zim
                gz[i, k] = complex(
                    gre * (s + a1 * zre * zre) + gim * cross,
                    gre * cross + gim * (s + a1 * zim * zim),
                )
                gb[k] -= (gre * zre + gim * zim) / rv
        return gz, gb

    smo_solve = _smo_solve_nb
    ead_fwd = _ead_fwd_nb
    ead_bwd = _ead_bwd_nb
    modrelu_fwd = _modrelu_fwd_nb
    modrelu_bwd = _modrelu_bwd_nb
else:
    smo_solve = _smo_solve_np
    ead_fwd = _ead_fwd_np
    ead_bwd = _ead_bwd_np
    modrelu_fwd = _modrelu_fwd_np
    modrelu_bwd = _modrelu_bwd_np

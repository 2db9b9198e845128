"""Field-independent hot loops, each with a numba and a numpy implementation.

``pair_scan`` examines every pair (i < j) of sampled lines.  For each pair it
returns the closest-approach parameters, the gap, the angle between the
directions and whether the pair counts as parallel.  Both variants produce
the same arrays (up to rounding); which one runs is decided by
``linefib._accel.USE_NUMBA``.
"""

from __future__ import annotations

import math

import numpy as np

from . import _accel

PARALLEL_COS = 1.0 - 1e-12


@_accel.njit
def _pair_scan_numba(B, D):
    n = B.shape[0]
    m = n * (n - 1) // 2
    t1 = np.empty(m)
    t2 = np.empty(m)
    gap = np.empty(m)
    angle = np.empty(m)
    par = np.empty(m, dtype=np.bool_)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            w0 = B[i, 0] - B[j, 0]
            w1 = B[i, 1] - B[j, 1]
            w2 = B[i, 2] - B[j, 2]
            a = D[i, 0] * D[j, 0] + D[i, 1] * D[j, 1] + D[i, 2] * D[j, 2]
            c0 = D[i, 1] * D[j, 2] - D[i, 2] * D[j, 1]
            c1 = D[i, 2] * D[j, 0] - D[i, 0] * D[j, 2]
            c2 = D[i, 0] * D[j, 1] - D[i, 1] * D[j, 0]
            angle[k] = math.atan2(math.sqrt(c0 * c0 + c1 * c1 + c2 * c2), a)
            wd1 = w0 * D[i, 0] + w1 * D[i, 1] + w2 * D[i, 2]
            wd2 = w0 * D[j, 0] + w1 * D[j, 1] + w2 * D[j, 2]
            if abs(a) > PARALLEL_COS:
                par[k] = True
                t1[k] = 0.0
                t2[k] = 0.0
                q0 = w0 - wd1 * D[i, 0]
                q1 = w1 - wd1 * D[i, 1]
                q2 = w2 - wd1 * D[i, 2]
                r0 = w0 - wd2 * D[j, 0]
                r1 = w1 - wd2 * D[j, 1]
                r2 = w2 - wd2 * D[j, 2]
                gap[k] = 0.5 * (math.sqrt(q0 * q0 + q1 * q1 + q2 * q2) + math.sqrt(r0 * r0 + r1 * r1 + r2 * r2))
            else:
                par[k] = False
                den = 1.0 - a * a
                s1 = (a * wd2 - wd1) / den
                s2 = (wd2 - a * wd1) / den
                t1[k] = s1
                t2[k] = s2
                # triple product form is exactly invariant under swapping i, j
                gap[k] = abs(w0 * c0 + w1 * c1 + w2 * c2) / math.sqrt(c0 * c0 + c1 * c1 + c2 * c2)
            k += 1
    return t1, t2, gap, angle, par


def _pair_scan_numpy(B, D, chunk: int = 200_000):
    n = B.shape[0]
    I, J = np.triu_indices(n, k=1)
    outs = [[], [], [], [], []]
    for start in range(0, len(I), chunk):
        i, j = I[start : start + chunk], J[start : start + chunk]
        w = B[i] - B[j]
        di, dj = D[i], D[j]
        a = np.einsum("ij,ij->i", di, dj)
        c = np.cross(di, dj)
        angle = np.arctan2(np.sqrt(np.einsum("ij,ij->i", c, c)), a)
        wd1 = np.einsum("ij,ij->i", w, di)
        wd2 = np.einsum("ij,ij->i", w, dj)
        par = np.abs(a) > PARALLEL_COS
        den = np.where(par, 1.0, 1.0 - a * a)
        s1 = np.where(par, 0.0, (a * wd2 - wd1) / den)
        s2 = np.where(par, 0.0, (wd2 - a * wd1) / den)
        cn = np.sqrt(np.einsum("ij,ij->i", c, c))
        gap_np = np.abs(w[:, 0] * c[:, 0] + w[:, 1] * c[:, 1] + w[:, 2] * c[:, 2]) / np.where(par, 1.0, cn)
        q = w - wd1[:, None] * di
        r = w - wd2[:, None] * dj
        gap_p = 0.5 * (np.sqrt(np.einsum("ij,ij->i", q, q)) + np.sqrt(np.einsum("ij,ij->i", r, r)))
        for lst, arr in zip(outs, (s1, s2, np.where(par, gap_p, gap_np), angle, par)):
            lst.append(arr)
    if not outs[0]:
        empty = np.empty(0)
        return empty, empty, empty, empty, np.empty(0, dtype=bool)
    return tuple(np.concatenate(lst) for lst in outs)


def pair_scan(bases: np.ndarray, directions: np.ndarray, use_numba: bool | None = None):
    """All-pairs closest approach for lines ``bases[k] + t * directions[k]`` (unit directions).

    Returns ``(t1, t2, gap, angle, parallel)`` flattened in ``np.triu_indices`` order.
    """
    B = np.ascontiguousarray(bases, dtype=float)
    D = np.ascontiguousarray(directions, dtype=float)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    if use_numba and _accel.HAVE_NUMBA:
        return _pair_scan_numba(B, D)
    return _pair_scan_numpy(B, D)


@_accel.njit
def _clip_numba(B, D, lo, hi):
    n = B.shape[0]
    out = np.empty((n, 2))
    for k in range(n):
        tmin = -np.inf
        tmax = np.inf
        for c in range(3):
            d = D[k, c]
            if d == 0.0:
                if B[k, c] < lo[c] or B[k, c] > hi[c]:
                    tmin = np.inf
                    tmax = -np.inf
            else:
                ta = (lo[c] - B[k, c]) / d
                tb = (hi[c] - B[k, c]) / d
                if ta > tb:
                    ta, tb = tb, ta
                tmin = max(tmin, ta)
                tmax = min(tmax, tb)
        out[k, 0] = tmin
        out[k, 1] = tmax
    return out


def _clip_numpy(B, D, lo, hi):
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo[None, :] - B) / D
        tb = (hi[None, :] - B) / D
    t_lo = np.minimum(ta, tb)
    t_hi = np.maximum(ta, tb)
    axis_par = D == 0.0
    inside = (B >= lo[None, :]) & (B <= hi[None, :])
    t_lo = np.where(axis_par, np.where(inside, -np.inf, np.inf), t_lo)
    t_hi = np.where(axis_par, np.where(inside, np.inf, -np.inf), t_hi)
    return np.stack([t_lo.max(axis=1), t_hi.min(axis=1)], axis=1)


def clip_to_box(bases, directions, lo, hi, use_numba: bool | None = None) -> np.ndarray:
    """Parameter interval ``[t_min, t_max]`` of each line inside the box (slab method)."""
    B = np.ascontiguousarray(bases, dtype=float)
    D = np.ascontiguousarray(directions, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    if use_numba and _accel.HAVE_NUMBA:
        return _clip_numba(B, D, lo, hi)
    return _clip_numpy(B, D, lo, hi)

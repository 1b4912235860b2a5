"""Enumeration kernels for the brute-force verification oracle.

Enumerates every two- and three-point distribution supported on a grid,
solves the moment system for the masses, and tracks the minimum of the
competitive-ratio and revenue objectives at a fixed price p.

Two interchangeable implementations are provided: a numba-compiled loop
kernel (default) and a vectorized numpy kernel selected by setting the
environment variable ROBUSTPRICE_PURE_NUMPY=1.  Both enumerate candidates
in the same lexicographic order and break ties by first occurrence, so
results are bit-comparable.
"""

from __future__ import annotations

import os

import numpy as np

# Masses below -MASS_TOL mark an infeasible candidate; the rest are
# clamped to zero.  DET_TOL skips near-singular moment systems, which are
# nearly-collinear supports already covered by two-point candidates.
MASS_TOL = 1e-10
DISP_TOL = 1e-9
DET_TOL = 1e-12

_CHUNK = 500_000  # numpy-path triple-enumeration chunk size


def _enumerate_impl(g, phi, mu, s, p, disp_tol, mass_tol):
    """Loop kernel; compiled with numba when available.

    Returns (cr_min, rev_min, cr_sup, cr_mas, rev_sup, rev_mas, n_feasible)
    where the witness arrays have length 3 with trailing NaN padding.
    """
    n = g.shape[0]
    best_cr = np.inf
    best_rev = np.inf
    cr_sup = np.full(3, np.nan)
    cr_mas = np.full(3, np.nan)
    rev_sup = np.full(3, np.nan)
    rev_mas = np.full(3, np.nan)
    n_feasible = 0
    for i in range(n):
        xi = g[i]
        fi = phi[i]
        for j in range(i + 1, n):
            d = g[j] - xi
            wj = (mu - xi) / d
            wi = 1.0 - wj
            if wi < -mass_tol or wj < -mass_tol:
                continue
            if abs(fi * wi + phi[j] * wj - s) > disp_tol:
                continue
            if wi < 0.0:
                wi = 0.0
            if wj < 0.0:
                wj = 0.0
            n_feasible += 1
            t_p = 0.0
            if xi >= p:
                t_p += wi
            if g[j] >= p:
                t_p += wj
            rev = p * t_p
            opt = rev
            if xi > 0.0:
                v = xi * (wi + wj)
                if v > opt:
                    opt = v
            v = g[j] * wj
            if v > opt:
                opt = v
            cr = rev / opt if opt > 0.0 else 1.0
            if cr < best_cr:
                best_cr = cr
                cr_sup[0] = xi
                cr_sup[1] = g[j]
                cr_sup[2] = np.nan
                cr_mas[0] = wi
                cr_mas[1] = wj
                cr_mas[2] = np.nan
            if rev < best_rev:
                best_rev = rev
                rev_sup[0] = xi
                rev_sup[1] = g[j]
                rev_sup[2] = np.nan
                rev_mas[0] = wi
                rev_mas[1] = wj
                rev_mas[2] = np.nan
    for i in range(n):
        xi = g[i]
        fi = phi[i]
        for j in range(i + 1, n):
            xj = g[j] - xi
            fj = phi[j] - fi
            for k in range(j + 1, n):
                xk = g[k] - xi
                fk = phi[k] - fi
                det = xj * fk - xk * fj
                scale = abs(xj * fk) + abs(xk * fj)
                if abs(det) <= DET_TOL * scale:
                    continue
                bm = mu - xi
                bs = s - fi
                wj = (bm * fk - xk * bs) / det
                wk = (xj * bs - bm * fj) / det
                wi = 1.0 - wj - wk
                if wi < -mass_tol or wj < -mass_tol or wk < -mass_tol:
                    continue
                if wi < 0.0:
                    wi = 0.0
                if wj < 0.0:
                    wj = 0.0
                if wk < 0.0:
                    wk = 0.0
                n_feasible += 1
                t_p = 0.0
                if xi >= p:
                    t_p += wi
                if g[j] >= p:
                    t_p += wj
                if g[k] >= p:
                    t_p += wk
                rev = p * t_p
                opt = rev
                if xi > 0.0:
                    v = xi * (wi + wj + wk)
                    if v > opt:
                        opt = v
                v = g[j] * (wj + wk)
                if v > opt:
                    opt = v
                v = g[k] * wk
                if v > opt:
                    opt = v
                cr = rev / opt if opt > 0.0 else 1.0
                if cr < best_cr:
                    best_cr = cr
                    cr_sup[0] = xi
                    cr_sup[1] = g[j]
                    cr_sup[2] = g[k]
                    cr_mas[0] = wi
                    cr_mas[1] = wj
                    cr_mas[2] = wk
                if rev < best_rev:
                    best_rev = rev
                    rev_sup[0] = xi
                    rev_sup[1] = g[j]
                    rev_sup[2] = g[k]
                    rev_mas[0] = wi
                    rev_mas[1] = wj
                    rev_mas[2] = wk
    return best_cr, best_rev, cr_sup, cr_mas, rev_sup, rev_mas, n_feasible


def _pairs_numpy(g, phi, mu, s, p, disp_tol, mass_tol):
    n = g.size
    i, j = np.triu_indices(n, k=1)
    xi, xj = g[i], g[j]
    wj = (mu - xi) / (xj - xi)
    wi = 1.0 - wj
    feas = (wi >= -mass_tol) & (wj >= -mass_tol)
    feas &= np.abs(phi[i] * wi + phi[j] * wj - s) <= disp_tol
    if not feas.any():
        return (np.empty((0, 3)),) * 2 + (np.empty(0),) * 2
    xi, xj = xi[feas], xj[feas]
    wi = np.clip(wi[feas], 0.0, None)
    wj = np.clip(wj[feas], 0.0, None)
    t_p = np.where(xi >= p, wi, 0.0) + np.where(xj >= p, wj, 0.0)
    rev = p * t_p
    opt = np.maximum(rev, np.where(xi > 0, xi * (wi + wj), 0.0))
    opt = np.maximum(opt, xj * wj)
    cr = np.where(opt > 0, rev / np.where(opt > 0, opt, 1.0), 1.0)
    sup = np.column_stack([xi, xj, np.full(xi.size, np.nan)])
    mas = np.column_stack([wi, wj, np.full(xi.size, np.nan)])
    return sup, mas, cr, rev


def _triples_numpy(g, phi, mu, s, p, mass_tol):
    n = g.size
    from itertools import combinations
    idx = np.fromiter(
        (t for c in combinations(range(n), 3) for t in c), dtype=np.int64
    ).reshape(-1, 3)
    best_cr, best_rev = np.inf, np.inf
    best = {"cr": (None, None), "rev": (None, None)}
    n_feas = 0
    for start in range(0, idx.shape[0], _CHUNK):
        ch = idx[start:start + _CHUNK]
        xi, xj, xk = g[ch[:, 0]], g[ch[:, 1]], g[ch[:, 2]]
        fi, fj, fk = phi[ch[:, 0]], phi[ch[:, 1]], phi[ch[:, 2]]
        dxj, dxk = xj - xi, xk - xi
        dfj, dfk = fj - fi, fk - fi
        det = dxj * dfk - dxk * dfj
        scale = np.abs(dxj * dfk) + np.abs(dxk * dfj)
        ok = np.abs(det) > DET_TOL * scale
        det = np.where(ok, det, 1.0)
        bm, bs = mu - xi, s - fi
        wj = (bm * dfk - dxk * bs) / det
        wk = (dxj * bs - bm * dfj) / det
        wi = 1.0 - wj - wk
        feas = ok & (wi >= -mass_tol) & (wj >= -mass_tol) & (wk >= -mass_tol)
        n_feas += int(feas.sum())
        if not feas.any():
            continue
        xi, xj, xk = xi[feas], xj[feas], xk[feas]
        wi = np.clip(wi[feas], 0.0, None)
        wj = np.clip(wj[feas], 0.0, None)
        wk = np.clip(wk[feas], 0.0, None)
        t_p = (np.where(xi >= p, wi, 0.0) + np.where(xj >= p, wj, 0.0)
               + np.where(xk >= p, wk, 0.0))
        rev = p * t_p
        opt = np.maximum(rev, np.where(xi > 0, xi * (wi + wj + wk), 0.0))
        opt = np.maximum(opt, xj * (wj + wk))
        opt = np.maximum(opt, xk * wk)
        cr = np.where(opt > 0, rev / np.where(opt > 0, opt, 1.0), 1.0)
        a = int(np.argmin(cr))
        if cr[a] < best_cr:
            best_cr = float(cr[a])
            best["cr"] = (np.array([xi[a], xj[a], xk[a]]),
                          np.array([wi[a], wj[a], wk[a]]))
        a = int(np.argmin(rev))
        if rev[a] < best_rev:
            best_rev = float(rev[a])
            best["rev"] = (np.array([xi[a], xj[a], xk[a]]),
                          np.array([wi[a], wj[a], wk[a]]))
    return best_cr, best_rev, best["cr"], best["rev"], n_feas


def _enumerate_numpy(g, phi, mu, s, p, disp_tol, mass_tol):
    """Vectorized equivalent of the loop kernel (same enumeration order)."""
    best_cr, best_rev = np.inf, np.inf
    cr_sup = np.full(3, np.nan)
    cr_mas = np.full(3, np.nan)
    rev_sup = np.full(3, np.nan)
    rev_mas = np.full(3, np.nan)
    n_feasible = 0
    sup, mas, cr, rev = _pairs_numpy(g, phi, mu, s, p, disp_tol, mass_tol)
    if cr.size:
        n_feasible += cr.size
        a = int(np.argmin(cr))
        best_cr = float(cr[a])
        cr_sup, cr_mas = sup[a], mas[a]
        a = int(np.argmin(rev))
        best_rev = float(rev[a])
        rev_sup, rev_mas = sup[a], mas[a]
    t_cr, t_rev, t_cr_wit, t_rev_wit, t_nf = _triples_numpy(g, phi, mu, s, p, mass_tol)
    n_feasible += t_nf
    if t_cr < best_cr:
        best_cr = t_cr
        cr_sup, cr_mas = t_cr_wit
    if t_rev < best_rev:
        best_rev = t_rev
        rev_sup, rev_mas = t_rev_wit
    return best_cr, best_rev, cr_sup, cr_mas, rev_sup, rev_mas, n_feasible


def _build_kernel():
    if os.environ.get("ROBUSTPRICE_PURE_NUMPY", "") == "1":
        return _enumerate_numpy, "numpy"
    try:
        from numba import njit
    except ImportError:
        return _enumerate_numpy, "numpy"
    return njit(cache=True)(_enumerate_impl), "numba"


_KERNEL, KERNEL_BACKEND = _build_kernel()


def enumerate_min(g, phi, mu, s, p, disp_tol=DISP_TOL, mass_tol=MASS_TOL):
    """Minimum CR and revenue over grid-supported 2-/3-point members.

    Returns (cr_min, rev_min, (cr_supports, cr_masses),
    (rev_supports, rev_masses), n_feasible); witness arrays carry NaN
    padding in the third slot for two-point witnesses.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    cr, rev, cs, cm, rs, rm, nf = _KERNEL(g, phi, float(mu), float(s), float(p),
                                          float(disp_tol), float(mass_tol))
    return cr, rev, (cs, cm), (rs, rm), nf

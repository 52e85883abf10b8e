"""Pure-NumPy kernel implementations (fallback backend).

Same contracts as the compiled versions in ``_fast.pyx``; see
``minorant._kernels`` for the dispatch.  Vectorized over fixed-size chunks
so memory stays bounded and results do not depend on caller parallelism.

Young functions are encoded as (kind, param): kind 0 is z**p, kind 1 is
expm1(z**Q / Q).  Tabulated functions never reach the kernels.
"""

import numpy as np

_CAP = 710.0  # exp overflow threshold; expm1(710) == inf is deliberate
_COL_CHUNK = 64
_PATH_CHUNK = 1024
_PAIR_CHUNK = 512


def _phi(x, kind, param):
    if kind == 0:
        return x**param
    return np.expm1(np.minimum(x**param / param, _CAP))


def _phi_inv(w, kind, param):
    if kind == 0:
        return w ** (1.0 / param)
    return (param * np.log1p(w)) ** (1.0 / param)


def _lux_roots_block(a, weights, q):
    """Vectorized bisection for exp-family Luxemburg norms, one root per column."""
    m, k = a.shape
    amax = a.max(axis=0)
    out = np.zeros(k)
    live = amax > 0
    if not np.any(live):
        return out
    a = a[:, live]
    amax = amax[live]
    u_inv1 = (q * np.log(2.0)) ** (1.0 / q)  # Phi^{-1}(1)

    def modular(u):
        return weights @ np.expm1(np.minimum((a * u) ** q / q, _CAP))

    u_lo = u_inv1 / amax
    u_hi = u_lo.copy()
    for _ in range(200):
        need = modular(u_hi) < 1.0
        if not np.any(need):
            break
        u_lo = np.where(need, u_hi, u_lo)
        u_hi = np.where(need, u_hi * 2.0, u_hi)
    for _ in range(110):
        if np.all(u_hi - u_lo <= 1e-14 * u_hi):
            break
        mid = 0.5 * (u_lo + u_hi)
        high = modular(mid) >= 1.0
        u_hi = np.where(high, mid, u_hi)
        u_lo = np.where(high, u_lo, mid)
    out[live] = 1.0 / (0.5 * (u_lo + u_hi))
    return out


def lux_norm_cols(values, weights, kind, param):
    m, k = values.shape
    a = np.abs(values)
    if kind == 0:
        s = weights @ a**param
        return s ** (1.0 / param)
    out = np.empty(k)
    for start in range(0, k, _COL_CHUNK):
        blk = a[:, start : start + _COL_CHUNK]
        out[start : start + _COL_CHUNK] = _lux_roots_block(blk, weights, param)
    return out


def lux_norm_pairs(values, weights, pi, pj, kind, param):
    out = np.empty(pi.shape[0])
    for start in range(0, pi.shape[0], _COL_CHUNK):
        i = pi[start : start + _COL_CHUNK]
        j = pj[start : start + _COL_CHUNK]
        blk = np.abs(values[:, i] - values[:, j])
        if kind == 0:
            out[start : start + _COL_CHUNK] = (weights @ blk**param) ** (1.0 / param)
        else:
            out[start : start + _COL_CHUNK] = _lux_roots_block(blk, weights, param)
    return out


def v_per_path(values, pi, pj, coeff, inv_d, kind, param):
    n_paths = values.shape[0]
    out = np.zeros(n_paths)
    for ps in range(0, n_paths, _PATH_CHUNK):
        rows = values[ps : ps + _PATH_CHUNK]
        acc = np.zeros(rows.shape[0])
        for qs in range(0, pi.shape[0], _PAIR_CHUNK):
            i = pi[qs : qs + _PAIR_CHUNK]
            j = pj[qs : qs + _PAIR_CHUNK]
            x = np.abs(rows[:, i] - rows[:, j]) * inv_d[qs : qs + _PAIR_CHUNK]
            acc += _phi(x, kind, param) @ coeff[qs : qs + _PAIR_CHUNK]
        out[ps : ps + _PATH_CHUNK] = acc
    return out


def modulus_per_path(values, pi, pj):
    n_paths = values.shape[0]
    out = np.zeros(n_paths)
    if pi.shape[0] == 0:
        return out
    for ps in range(0, n_paths, _PATH_CHUNK):
        rows = values[ps : ps + _PATH_CHUNK]
        best = np.zeros(rows.shape[0])
        for qs in range(0, pi.shape[0], _PAIR_CHUNK):
            i = pi[qs : qs + _PAIR_CHUNK]
            j = pj[qs : qs + _PAIR_CHUNK]
            np.maximum(best, np.abs(rows[:, i] - rows[:, j]).max(axis=1), out=best)
        out[ps : ps + _PATH_CHUNK] = best
    return out


def ai_scan(values, z, csq, seglen, rank_i, rank_j, pi, pj, kind, param, slack):
    n_paths, n = values.shape
    viol = np.zeros(n_paths, dtype=np.int64)
    max_ratio = np.zeros(n_paths)
    pos = seglen > 0
    for ps in range(0, n_paths, _PATH_CHUNK):
        rows = values[ps : ps + _PATH_CHUNK]
        v = z[ps : ps + _PATH_CHUNK]
        num = 4.0 * v[:, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(
                csq[None, :, :] > 0,
                _phi_inv(np.where(csq[None, :, :] > 0, num / csq[None, :, :], 0.0), kind, param),
                np.where(num > 0, np.inf, 0.0),
            )
        contrib = np.where(pos[None, :, :], seglen[None, :, :] * g, 0.0)
        cumw = np.concatenate(
            [np.zeros((rows.shape[0], n, 1)), np.cumsum(contrib, axis=2)[:, :, :-1]], axis=2
        )
        w6 = 6.0 * (cumw[:, pi, rank_i] + cumw[:, pj, rank_j])
        delta = np.abs(rows[:, pi] - rows[:, pj])
        viol[ps : ps + _PATH_CHUNK] = np.sum(delta > w6 * (1.0 + slack), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((w6 == 0.0) & (delta == 0.0), 0.0, delta / w6)
            ratio = np.where(np.isfinite(w6), ratio, 0.0)
        max_ratio[ps : ps + _PATH_CHUNK] = ratio.max(axis=1) if ratio.shape[1] else 0.0
    return viol, max_ratio

"""Kernel dispatch: compiled extension when available, NumPy fallback otherwise.

Set ``MINORANT_PURE=1`` to force the fallback.  Both backends implement the
same contracts and agree to floating-point tolerance; ``BACKEND`` records
which one is active.
"""

import os

import numpy as np

from . import _slow

if os.environ.get("MINORANT_PURE", "").strip().lower() in ("1", "true", "yes"):
    _impl = _slow
    BACKEND = "python"
else:
    try:
        from . import _fast as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _slow
        BACKEND = "python"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def lux_norm_cols(values, weights, kind, param):
    return _impl.lux_norm_cols(_f64(values), _f64(weights), int(kind), float(param))


def lux_norm_pairs(values, weights, pi, pj, kind, param):
    return _impl.lux_norm_pairs(
        _f64(values), _f64(weights), _i64(pi), _i64(pj), int(kind), float(param)
    )


def v_per_path(values, pi, pj, coeff, inv_d, kind, param):
    return _impl.v_per_path(
        _f64(values), _i64(pi), _i64(pj), _f64(coeff), _f64(inv_d), int(kind), float(param)
    )


def modulus_per_path(values, pi, pj):
    return _impl.modulus_per_path(_f64(values), _i64(pi), _i64(pj))


def ai_scan(values, z, csq, seglen, rank_i, rank_j, pi, pj, kind, param, slack):
    return _impl.ai_scan(
        _f64(values),
        _f64(z),
        _f64(csq),
        _f64(seglen),
        _i64(rank_i),
        _i64(rank_j),
        _i64(pi),
        _i64(pj),
        int(kind),
        float(param),
        float(slack),
    )

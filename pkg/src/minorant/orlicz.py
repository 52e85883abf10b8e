"""Young-Orlicz function families and the norm machinery built on them.

A Young function here is a continuous, strictly increasing, convex
``Phi`` with ``Phi(0) = 0`` and ``Phi(z) -> inf``.  The module provides

* the built-in families ``power`` (z^p), ``exp_power`` (exp(z^Q/Q) - 1,
  with ``exp_quadratic`` as the Q = 2 alias) and ``tabulated`` grids,
* Luxemburg norms  inf{c > 0 : sum_i w_i Phi(|s_i|/c) <= 1}  of weighted
  sample sets,
* discrete Young-Fenchel conjugation  g*(x) = sup_y (x y - g(y)),
* the doubling constant  sup_{x,y} Phi^{-1}(xy) / (Phi^{-1}(x) + Phi^{-1}(y))
  with a divergence flag, and
* empirical log-moment-generating functions ("natural" convex generators)
  estimated from simulated paths.

All objects are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import logsumexp

from . import _kernels
from .errors import DomainError, HullError, ValidationError

__all__ = [
    "YoungFunction",
    "ConvexGridFunction",
    "Delta2Result",
    "eval_phi",
    "invert_phi",
    "luxemburg_norm",
    "fenchel_conjugate",
    "delta2_constant",
    "natural_phi",
    "convex_minorant",
]

_CONVEXITY_SLACK = 1e-12
# exp() overflows just above 709; family validation grids stay below this.
_EXP_ARG_CAP = 700.0


def _as_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValidationError(f"weights shape {w.shape} does not match {n} samples")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValidationError(f"weights sum to {w.sum():.17g}, expected 1 within 1e-12")
    return w


@dataclass(frozen=True)
class YoungFunction:
    """A Young-Orlicz function from one of the built-in families.

    ``family`` is one of ``power`` (param ``p``), ``exp_power`` (param ``Q``),
    ``exp_quadratic`` (no params; alias of ``exp_power`` with Q = 2) or
    ``tabulated`` (params ``z``, ``phi``: strictly increasing grids).
    Construction validates Phi(0) = 0, strict monotonicity and midpoint
    convexity on a sample grid, so e.g. ``power`` with p < 1 or
    ``exp_power`` with Q < 1 is rejected.
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in ("power", "exp_power", "exp_quadratic", "tabulated"):
            raise ValidationError(f"unknown Young function family {self.family!r}")
        if self.family == "power":
            p = float(self.params.get("p", 0.0))
            if not p > 0:
                raise ValidationError("power family needs p > 0")
        elif self.family == "exp_power":
            q = float(self.params.get("Q", 0.0))
            if not q > 0:
                raise ValidationError("exp_power family needs Q > 0")
        elif self.family == "tabulated":
            z = np.asarray(self.params.get("z"), dtype=float)
            v = np.asarray(self.params.get("phi"), dtype=float)
            if z.ndim != 1 or z.shape != v.shape or z.size < 3:
                raise ValidationError("tabulated family needs matching z/phi grids (>= 3 points)")
            if z[0] != 0.0 or v[0] != 0.0:
                raise ValidationError("tabulated grid must start at (0, 0)")
            if np.any(np.diff(z) <= 0):
                raise ValidationError("tabulated z grid must be strictly increasing")
            if np.any(np.diff(v) <= 0):
                raise ValidationError("tabulated phi values must be strictly increasing")
            object.__setattr__(self, "params", {"z": z, "phi": v})
            object.__setattr__(self, "_interp", PchipInterpolator(z, v, extrapolate=False))
        self._validate_shape()

    # -- family plumbing ---------------------------------------------------

    def _validate_shape(self) -> None:
        z = self._validation_grid()
        vals = self(z)
        if vals[0] != 0.0:
            raise ValidationError("Phi(0) must be 0")
        if np.any(np.diff(vals) <= 0):
            raise ValidationError("Phi must be strictly increasing")
        mid = self(0.5 * (z[:-1] + z[1:]))
        avg = 0.5 * (vals[:-1] + vals[1:])
        slack = _CONVEXITY_SLACK * np.maximum(1.0, np.abs(avg))
        if np.any(mid > avg + slack):
            raise ValidationError("Phi fails midpoint convexity on the validation grid")

    def _validation_grid(self) -> np.ndarray:
        if self.family == "tabulated":
            return self.params["z"]
        if self.family == "power":
            hi = 1e3
        else:
            q = self.kernel_spec[1]
            hi = min(1e3, (_EXP_ARG_CAP * q) ** (1.0 / q))
        return np.concatenate([[0.0], np.geomspace(1e-6, hi, 121)])

    @property
    def kernel_spec(self) -> Optional[tuple]:
        """(kind, param) encoding used by the compiled kernels; None if tabulated."""
        if self.family == "power":
            return (0, float(self.params["p"]))
        if self.family == "exp_power":
            return (1, float(self.params["Q"]))
        if self.family == "exp_quadratic":
            return (1, 2.0)
        return None

    # -- evaluation --------------------------------------------------------

    def __call__(self, z):
        """Phi(z) for scalar or array z >= 0."""
        z = np.asarray(z, dtype=float)
        if np.any(z < 0):
            raise DomainError("Phi is defined for z >= 0")
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        spec = self.kernel_spec
        if spec is None:
            zg = self.params["z"]
            if np.any(z < zg[0]) or np.any(z > zg[-1]):
                raise HullError(
                    f"z outside tabulated hull [{zg[0]:g}, {zg[-1]:g}]"
                )
            out = self._interp(z)
        elif spec[0] == 0:
            out = z ** spec[1]
        else:
            q = spec[1]
            out = np.expm1(np.minimum(z**q / q, _EXP_ARG_CAP))
        return float(out[0]) if scalar else out

    def inverse(self, w):
        """Phi^{-1}(w) = sup{z >= 0 : Phi(z) <= w} for w >= 0.

        Closed form for the parametric families; bracketed root-finding on
        the grid for tabulated functions, where values past the grid top are
        capped at the last abscissa (the sup over the representable hull).
        """
        w = np.asarray(w, dtype=float)
        if np.any(w < 0):
            raise DomainError("Phi^{-1} is defined for w >= 0")
        scalar = w.ndim == 0
        w = np.atleast_1d(w)
        spec = self.kernel_spec
        if spec is None:
            out = np.array([self._inverse_tabulated(float(wi)) for wi in w])
        elif spec[0] == 0:
            out = w ** (1.0 / spec[1])
        else:
            q = spec[1]
            out = (q * np.log1p(w)) ** (1.0 / q)
        return float(out[0]) if scalar else out

    def _inverse_tabulated(self, w: float) -> float:
        zg, vg = self.params["z"], self.params["phi"]
        if w <= 0.0:
            return 0.0
        if w >= vg[-1]:
            return float(zg[-1])
        # bracket inside the grid cell containing w, then polish
        j = int(np.searchsorted(vg, w))
        lo, hi = zg[j - 1], zg[j]
        f = lambda z: float(self._interp(z)) - w
        if f(lo) >= 0.0:
            return float(lo)
        return float(brentq(f, lo, hi, xtol=1e-300, rtol=1e-13))

    # -- serialization -----------------------------------------------------

    def to_config(self) -> dict:
        if self.family == "tabulated":
            return {
                "family": "tabulated",
                "z": self.params["z"].tolist(),
                "phi": self.params["phi"].tolist(),
            }
        return {"family": self.family, **{k: float(v) for k, v in self.params.items()}}

    @classmethod
    def from_config(cls, cfg: dict) -> "YoungFunction":
        cfg = dict(cfg)
        family = cfg.pop("family")
        return cls(family, cfg)


@dataclass(frozen=True)
class ConvexGridFunction:
    """A convex function tabulated on a strictly increasing grid.

    Discrete convexity (nondecreasing chord slopes, within a small slack)
    is validated at construction.  Evaluation between grid points is linear,
    which preserves convexity.
    """

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise ValidationError("grid function needs matching 1-d x/value arrays")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("abscissae must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ValidationError("grid function entries must be finite")
        _check_discrete_convexity(x, v)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < self.x[0]) or np.any(t > self.x[-1]):
            raise HullError(f"argument outside grid hull [{self.x[0]:g}, {self.x[-1]:g}]")
        out = np.interp(t, self.x, self.values)
        return float(out[0]) if scalar else out

    @property
    def hull(self) -> tuple:
        return (float(self.x[0]), float(self.x[-1]))

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.x)

    def to_config(self) -> dict:
        return {"x": self.x.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_config(cls, cfg: dict) -> "ConvexGridFunction":
        return cls(np.asarray(cfg["x"], dtype=float), np.asarray(cfg["values"], dtype=float))


def _check_discrete_convexity(x: np.ndarray, v: np.ndarray) -> None:
    s = np.diff(v) / np.diff(x)
    if s.size < 2:
        return
    scale = np.maximum(1.0, np.maximum(np.abs(s[1:]), np.abs(s[:-1])))
    if np.any(np.diff(s) < -1e-9 * scale):
        worst = float(np.min(np.diff(s) / scale))
        raise ValidationError(f"grid values are not discretely convex (slope drop {worst:.3e})")


def eval_phi(phi: YoungFunction, z):
    """Phi(z); exact closed form for parametric families, monotone-cubic
    interpolation for tabulated ones (range error outside the grid hull)."""
    return phi(z)


def invert_phi(phi: YoungFunction, w):
    """Phi^{-1}(w) = sup{z >= 0 : Phi(z) <= w}."""
    return phi.inverse(w)


def luxemburg_norm(samples, weights, phi: YoungFunction) -> float:
    """Luxemburg norm of a weighted sample set.

    Returns the root c of  sum_i w_i Phi(|s_i|/c) = 1  (0 when every sample
    is 0).  Parametric families go through the batched kernel: a closed form
    for powers, a bracketed safeguarded-Newton root otherwise, tight enough
    that the modular at the returned norm is 1 within 1e-8.
    """
    s = np.asarray(samples, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DomainError("samples must be a non-empty 1-d array")
    if not np.all(np.isfinite(s)):
        raise DomainError("samples must be finite")
    w = _as_weights(weights, s.size)
    a = np.abs(s)
    if not np.any(a > 0):
        return 0.0
    spec = phi.kernel_spec
    if spec is not None:
        out = _kernels.lux_norm_cols(np.ascontiguousarray(a[:, None]), w, spec[0], spec[1])
        return float(out[0])
    return _lux_norm_tabulated(a, w, phi)


def _lux_norm_tabulated(a: np.ndarray, w: np.ndarray, phi: YoungFunction) -> float:
    z_max = float(phi.params["z"][-1])
    amax = float(a.max())
    modular = lambda c: float(np.sum(w * phi(a / c)))
    c_lo = amax / z_max
    if modular(c_lo) < 1.0:
        raise HullError(
            "tabulated Phi grid too short: modular < 1 at the smallest in-hull scale "
            f"(extend the grid beyond z = {z_max:g})"
        )
    c_hi = max(c_lo, amax)
    while modular(c_hi) > 1.0:
        c_hi *= 2.0
        if c_hi > 1e300:
            raise DomainError("Luxemburg bracketing failed to terminate")
    return float(brentq(lambda c: modular(c) - 1.0, c_lo, c_hi, xtol=1e-300, rtol=1e-13))


def fenchel_conjugate(g: ConvexGridFunction, x_grid) -> ConvexGridFunction:
    """Young-Fenchel transform g*(x) = sup_y (x y - g(y)) by direct supremum.

    The supremum runs over the tabulation grid of ``g`` (a double loop in
    vectorized form; instance sizes are small enough that correctness beats
    a fast Legendre transform).  The output is convex by construction as a
    pointwise max of affine functions.
    """
    x = np.unique(np.asarray(x_grid, dtype=float))
    if x.size < 2:
        raise DomainError("conjugation needs at least two target abscissae")
    vals = np.empty_like(x)
    y, gy = g.x, g.values
    chunk = max(1, int(4e6) // max(1, y.size))
    for start in range(0, x.size, chunk):
        xs = x[start : start + chunk, None]
        vals[start : start + chunk] = np.max(xs * y[None, :] - gy[None, :], axis=1)
    return ConvexGridFunction(x, vals)


def conjugate_at(g: ConvexGridFunction, x: float) -> float:
    """g*(x) at a single point (same supremum rule as fenchel_conjugate)."""
    return float(np.max(x * g.x - g.values))


@dataclass(frozen=True)
class Delta2Result:
    """Doubling-constant search result.

    ``value`` is the grid supremum of Phi^{-1}(xy)/(Phi^{-1}(x)+Phi^{-1}(y));
    ``diverging`` is set when the running supremum is still growing when the
    search hull boundary is reached, i.e. the constant looks infinite.
    """

    value: float
    diverging: bool
    argmax: tuple
    shell_sups: tuple

    def __float__(self) -> float:
        return self.value


def delta2_constant(
    phi: YoungFunction,
    search_hull: tuple = (1e-3, 1e6),
    points_per_decade: int = 24,
) -> Delta2Result:
    """Estimate the doubling constant K = sup Phi^{-1}(xy)/(Phi^{-1}x + Phi^{-1}y).

    The sup is taken on a log-spaced grid over ``search_hull`` squared.  The
    running supremum is tracked over nested decade shells of max(x, y); the
    result is flagged diverging when the final shell still grows it by more
    than 1% without clear decay relative to the previous shell's growth.
    (For z^p the ratio grows like a power forever; for exp(z^Q/Q) - 1 with
    Q >= 1 the true sup is 1, approached only logarithmically, so the decay
    test is what separates the two on a bounded hull.)
    """
    lo, hi = float(search_hull[0]), float(search_hull[1])
    if not (0 < lo < hi) or not np.isfinite(hi):
        raise DomainError("search hull must be a bounded, strictly positive interval")
    n_dec = np.log10(hi / lo)
    n = max(16, int(round(points_per_decade * n_dec)))
    grid = np.geomspace(lo, hi, n)
    inv = phi.inverse(grid)
    inv_prod = phi.inverse(np.outer(grid, grid).ravel()).reshape(n, n)
    ratio = inv_prod / (inv[:, None] + inv[None, :])
    gmax = np.maximum(grid[:, None], grid[None, :])

    n_shells = max(2, int(np.ceil(n_dec)))
    bounds = np.geomspace(lo * (hi / lo) ** (1.0 / n_shells), hi, n_shells)
    shell_sups = []
    for b in bounds:
        mask = gmax <= b * (1 + 1e-12)
        shell_sups.append(float(np.max(ratio[mask])) if np.any(mask) else 0.0)
    k = float(np.max(ratio))
    flat = int(np.argmax(ratio))
    arg = (float(grid[flat // n]), float(grid[flat % n]))

    diverging = False
    if len(shell_sups) >= 2 and shell_sups[-2] > 0:
        g_last = shell_sups[-1] / shell_sups[-2] - 1.0
        if g_last > 0.01:
            if len(shell_sups) >= 3 and shell_sups[-3] > 0:
                g_prev = shell_sups[-2] / shell_sups[-3] - 1.0
                diverging = g_prev <= 0 or g_last > 0.9 * g_prev
            else:
                diverging = True
    return Delta2Result(k, diverging, arg, tuple(shell_sups))


def natural_phi(paths, lambda_grid) -> ConvexGridFunction:
    """Empirical log-MGF envelope  lambda -> log max_x mean_k exp(lambda xi_k(x)).

    ``paths`` is a (paths x points) value matrix (or anything with a
    ``.values`` attribute holding one).  Evaluation is done in log space, so
    large lambda cannot overflow; non-finite columns trigger truncation of
    the grid with a warning naming the achieved hull.  The result is
    projected onto its convex minorant before return, since Monte Carlo
    noise can break the convexity that a true log-MGF has.
    """
    values = np.asarray(getattr(paths, "values", paths), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.size == 0:
        raise DomainError("paths must be non-empty")
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.ndim != 1 or lam.size < 3:
        raise DomainError("lambda grid must be 1-d with >= 3 points")
    if not np.allclose(lam, -lam[::-1], rtol=0, atol=1e-12 * max(1.0, np.abs(lam).max())):
        raise DomainError("lambda grid must be symmetric about 0")
    n = values.shape[0]
    log_n = np.log(n)
    out = np.empty(lam.size)
    for i, l in enumerate(lam):
        out[i] = logsumexp(l * values, axis=0).max() - log_n
    finite = np.isfinite(out)
    if not np.all(finite):
        keep = finite.copy()
        # symmetric truncation so the returned grid stays symmetric
        keep &= keep[::-1]
        if keep.sum() < 3:
            raise DomainError("log-MGF non-finite on nearly the whole grid")
        warnings.warn(
            f"natural_phi truncated to lambda in [{lam[keep][0]:g}, {lam[keep][-1]:g}]",
            RuntimeWarning,
        )
        lam, out = lam[keep], out[keep]
    out = convex_minorant(lam, out)
    i0 = int(np.argmin(np.abs(lam)))
    if lam[i0] == 0.0:
        out[i0] = 0.0
    return ConvexGridFunction(lam, out)


def convex_minorant(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Greatest convex minorant of the points (x_i, y_i), sampled back on x."""
    hx, hy = [x[0]], [y[0]]
    for xi, yi in zip(x[1:], y[1:]):
        while len(hx) >= 2:
            s_new = (yi - hy[-2]) / (xi - hx[-2])
            s_old = (hy[-1] - hy[-2]) / (hx[-1] - hx[-2])
            if s_old >= s_new:
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(xi)
        hy.append(yi)
    return np.interp(x, np.asarray(hx), np.asarray(hy))

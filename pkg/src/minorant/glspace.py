"""Grand Lebesgue generator functions and the norms built from moment data.

A generator ``psi`` is positive and finite on an open support (A, B) with
1 <= A < B <= inf and +infinity outside; the associated norm of a random
variable f is  sup_p |f|_p / psi(p).  The module provides

* generator families: ``power`` p**(1/Q), the ``point_mass`` generator that
  reduces the norm to a single L_r norm, tabulated grids, and the derived
  transforms (1 - theta/p) psi(p) and [p / log(p+1)] psi(p),
* empirical moment profiles |f|_p from weighted samples,
* the fundamental function  sup_p delta^(1/p) / psi(p),
* conversion from a convex exponential-moment generator phi to
  psi(p) = p / phi^{-1}(p), and
* the tail bound  2 exp(-(p log psi(p))^*(log(z / norm)))  obtained by
  conjugating the exponential-space representation of the norm.

Suprema over open supports are taken on a geometric grid strictly inside
the support with relative margin 1e-6, capped at p = 1e4 when B = inf.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, HullError, SupportError, ValidationError
from .orlicz import ConvexGridFunction, YoungFunction, conjugate_at

__all__ = [
    "PsiFunction",
    "MomentProfile",
    "GpsiNorm",
    "empirical_moments",
    "gpsi_norm",
    "fundamental_function",
    "natural_psi",
    "psi_theta",
    "psi_from_bphi",
    "rosenthal_psi",
    "tail_bound_from_gpsi",
    "young_from_psi",
]

P_MAX = 1e4
_MARGIN = 1e-6
_GRID_POINTS = 512


@dataclass(frozen=True)
class PsiFunction:
    """A Grand Lebesgue generator.

    ``family`` is one of ``power`` (param ``Q``; psi(p) = p**(1/Q)),
    ``point_mass`` (param ``r``), ``tabulated`` (params ``p``, ``values``),
    or the derived wrappers ``theta_damped`` (param ``theta``) and
    ``rosenthal`` around a ``base`` generator.  ``value(p)`` returns None
    outside the support, never a sentinel number.
    """

    family: str
    params: dict
    support: tuple
    base: Optional["PsiFunction"] = None

    def __post_init__(self):
        a, b = self.support
        if self.family == "point_mass":
            r = float(self.params["r"])
            if not r >= 1:
                raise ValidationError("point_mass generator needs r >= 1")
        elif self.base is not None and self.base.is_point_mass:
            if not (a == b and a >= 1):
                raise ValidationError("derived point-mass generator needs degenerate support")
        else:
            if not (1 <= a < b):
                raise ValidationError(f"support ({a}, {b}) must satisfy 1 <= A < B")
        if self.family == "tabulated":
            p = np.asarray(self.params["p"], dtype=float)
            v = np.asarray(self.params["values"], dtype=float)
            if p.ndim != 1 or p.shape != v.shape or p.size < 2:
                raise ValidationError("tabulated psi needs matching 1-d p/value grids")
            if np.any(np.diff(p) <= 0) or p[0] < 1:
                raise ValidationError("tabulated p grid must be strictly increasing, >= 1")
            object.__setattr__(self, "params", {"p": p, "values": v})
        vals = np.array([self.value(p) for p in self.support_grid()], dtype=float)
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise ValidationError("psi must be positive and finite on its support interior")

    # -- constructors --------------------------------------------------------

    @classmethod
    def power(cls, Q: float, support: tuple = (1.0, np.inf)) -> "PsiFunction":
        return cls("power", {"Q": float(Q)}, (float(support[0]), float(support[1])))

    @classmethod
    def point_mass(cls, r: float) -> "PsiFunction":
        r = float(r)
        return cls("point_mass", {"r": r}, (r, r))

    @classmethod
    def tabulated(cls, p, values) -> "PsiFunction":
        p = np.asarray(p, dtype=float)
        return cls("tabulated", {"p": p, "values": np.asarray(values, dtype=float)},
                   (float(p[0]), float(p[-1])))

    # -- evaluation ----------------------------------------------------------

    @property
    def is_point_mass(self) -> bool:
        return self.family == "point_mass" or (
            self.base is not None and self.base.is_point_mass
        )

    def value(self, p: float) -> Optional[float]:
        """psi(p), or None when p is outside the support."""
        p = float(p)
        if self.family == "power":
            a, b = self.support
            if not (a < p < b):
                return None
            return p ** (1.0 / self.params["Q"])
        if self.family == "point_mass":
            r = self.params["r"]
            if abs(p - r) > 1e-12 * max(1.0, r):
                return None
            return 1.0
        if self.family == "tabulated":
            pg = self.params["p"]
            if p < pg[0] or p > pg[-1]:
                return None
            return float(np.interp(p, pg, self.params["values"]))
        if self.family == "theta_damped":
            theta = self.params["theta"]
            a, b = self.support
            lo_ok = p > a or (self.base.is_point_mass and p >= a)
            if not (lo_ok and p <= b):
                return None
            v = self.base.value(p)
            return None if v is None else (1.0 - theta / p) * v
        if self.family == "rosenthal":
            v = self.base.value(p)
            return None if v is None else p / np.log1p(p) * v
        raise ValidationError(f"unknown psi family {self.family!r}")

    def support_grid(self, n: int = _GRID_POINTS) -> np.ndarray:
        """Geometric evaluation grid strictly inside the support.

        Point masses yield the single point r.  The grid runs from
        A (1 + 1e-6) to min(B (1 - 1e-6), 1e4) and is shared by every
        supremum over p in this module.
        """
        if self.is_point_mass:
            if self.family == "point_mass":
                return np.array([self.params["r"]])
            return np.array([self.support[0]])
        a, b = self.support
        lo = a * (1 + _MARGIN)
        hi = min(b * (1 - _MARGIN) if np.isfinite(b) else np.inf, P_MAX)
        if not lo < hi:
            raise SupportError(f"support ({a}, {b}) has empty evaluable interior")
        return np.geomspace(lo, hi, n)

    def values_on(self, grid: np.ndarray) -> np.ndarray:
        return np.array([np.nan if (v := self.value(p)) is None else v for p in grid])

    # -- serialization ---------------------------------------------------------

    def to_config(self) -> dict:
        cfg = {"family": self.family}
        if self.family == "tabulated":
            cfg["p"] = self.params["p"].tolist()
            cfg["values"] = self.params["values"].tolist()
        else:
            cfg.update({k: float(v) for k, v in self.params.items()})
        if self.family not in ("point_mass",):
            a, b = self.support
            cfg["support"] = [a, None if np.isinf(b) else b]
        if self.base is not None:
            cfg["base"] = self.base.to_config()
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "PsiFunction":
        cfg = dict(cfg)
        family = cfg.pop("family")
        sup = cfg.pop("support", None)
        base = cfg.pop("base", None)
        if family == "point_mass":
            return cls.point_mass(cfg["r"])
        if family == "power":
            support = (1.0, np.inf) if sup is None else (sup[0], np.inf if sup[1] is None else sup[1])
            return cls.power(cfg["Q"], support)
        if family == "tabulated":
            return cls.tabulated(cfg["p"], cfg["values"])
        if family in ("theta_damped", "rosenthal"):
            basefn = cls.from_config(base)
            if family == "theta_damped":
                return psi_theta(basefn, cfg["theta"])
            return rosenthal_psi(basefn)
        raise ValidationError(f"unknown psi family {family!r}")


@dataclass(frozen=True)
class MomentProfile:
    """Moments |f|_p = (sum_j w_j |s_j|^p)^(1/p) on an increasing p grid.

    On a probability space p -> |f|_p is nondecreasing; violations beyond
    the slack (3 standard errors when ``se`` is provided, float rounding
    otherwise) are warned about rather than rejected, since externally
    estimated moments can be noisy.
    """

    p: np.ndarray
    moments: np.ndarray
    se: Optional[np.ndarray] = None

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        m = np.asarray(self.moments, dtype=float)
        if p.ndim != 1 or p.shape != m.shape or p.size == 0:
            raise ValidationError("profile needs matching 1-d p/moment arrays")
        if np.any(np.diff(p) <= 0) or p[0] < 1:
            raise ValidationError("p grid must be strictly increasing within [1, inf)")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValidationError("moments must be finite and nonnegative")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "moments", m)
        if self.se is not None:
            object.__setattr__(self, "se", np.asarray(self.se, dtype=float))
        drop = m[:-1] - m[1:]
        slack = 1e-9 * np.maximum(1.0, m[:-1])
        if self.se is not None:
            slack = slack + 3.0 * (self.se[:-1] + self.se[1:])
        if np.any(drop > slack):
            worst = float(np.max(drop - slack))
            warnings.warn(
                f"moment profile decreases in p beyond slack (worst excess {worst:.3e})",
                RuntimeWarning,
            )

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("p,moment\n")
            for pi, mi in zip(self.p, self.moments):
                fh.write(f"{pi!r},{mi!r}\n")


def empirical_moments(samples, weights, p_grid) -> MomentProfile:
    """Weighted moments |f|_p for each p in the grid, computed in log space
    so large powers cannot overflow."""
    s = np.abs(np.asarray(samples, dtype=float))
    if s.ndim != 1 or s.size == 0:
        raise DomainError("samples must be a non-empty 1-d array")
    w = np.asarray(weights, dtype=float)
    if w.shape != s.shape:
        raise ValidationError("weights must match samples")
    if abs(w.sum() - 1.0) > 1e-12 or np.any(w < 0):
        raise ValidationError("weights must be a probability vector")
    p = np.asarray(p_grid, dtype=float)
    mask = (s > 0) & (w > 0)
    out = np.zeros(p.size)
    if np.any(mask):
        logs = np.log(s[mask])
        logw = np.log(w[mask])
        for i, pi in enumerate(p):
            out[i] = np.exp(logsumexp(pi * logs + logw) / pi)
    return MomentProfile(p, out)


@dataclass(frozen=True)
class GpsiNorm:
    value: float
    p_star: float


def gpsi_norm(profile: MomentProfile, psi: PsiFunction) -> GpsiNorm:
    """sup over the profile grid (inside supp psi) of |f|_p / psi(p), with
    the achieving p (smallest on ties)."""
    ratios = []
    ps = []
    for p, m in zip(profile.p, profile.moments):
        v = psi.value(p)
        if v is not None:
            ratios.append(m / v)
            ps.append(p)
    if not ratios:
        raise SupportError("profile grid does not intersect the psi support")
    ratios = np.asarray(ratios)
    k = int(np.argmax(ratios))  # first max = smallest p on ties
    return GpsiNorm(float(ratios[k]), float(ps[k]))


def _fundamental_sup(psi: PsiFunction, delta: float) -> tuple:
    grid = psi.support_grid()
    vals = psi.values_on(grid)
    ratios = np.exp(np.log(delta) / grid) / vals
    k = int(np.argmax(ratios))
    return float(ratios[k]), float(grid[k])


def fundamental_function(psi: PsiFunction, delta: float, extended: bool = False) -> float:
    """Fundamental function  sup_p delta^(1/p) / psi(p)  of the generator.

    ``delta`` is a set measure in (0, 1]; pass ``extended=True`` to evaluate
    the same supremum formula for arguments above 1, which is how the Hoelder
    bound machinery uses it.  Exactly delta**(1/r) for a point mass at r.
    """
    delta = float(delta)
    if delta <= 0 or (delta > 1 and not extended):
        raise DomainError("delta must lie in (0, 1] (use extended=True beyond 1)")
    return _fundamental_sup(psi, delta)[0]


def natural_psi(family_profiles) -> PsiFunction:
    """Pointwise max of moment profiles over a shared p grid, as a tabulated
    generator (the natural generator of the family)."""
    profiles = list(family_profiles)
    if not profiles:
        raise DomainError("need at least one profile")
    p = profiles[0].p
    for prof in profiles[1:]:
        if prof.p.shape != p.shape or not np.array_equal(prof.p, p):
            raise ValidationError("profiles must share the same p grid")
    vals = np.max(np.stack([prof.moments for prof in profiles]), axis=0)
    return PsiFunction.tabulated(p, vals)


def psi_theta(psi: PsiFunction, theta: float) -> PsiFunction:
    """The damped generator (1 - theta/p) psi(p) on (max(A, theta), B)."""
    theta = float(theta)
    if theta <= 0:
        raise DomainError("theta must be positive")
    if psi.is_point_mass:
        r = psi.support[0]
        if r <= theta:
            raise SupportError(f"point mass at r={r:g} <= theta={theta:g}: empty support")
        return PsiFunction("theta_damped", {"theta": theta}, (r, r), base=psi)
    a, b = psi.support
    a_t = max(a, theta)
    if not b > a_t:
        raise SupportError(
            f"damped support (max({a:g}, {theta:g}), {b:g}) is empty"
        )
    return PsiFunction("theta_damped", {"theta": theta}, (a_t, b), base=psi)


def rosenthal_psi(psi: PsiFunction) -> PsiFunction:
    """The sum-stability transform [p / log(p+1)] psi(p), same support."""
    return PsiFunction("rosenthal", {}, psi.support, base=psi)


def psi_from_bphi(phi: ConvexGridFunction, n_points: int = 257) -> PsiFunction:
    """Generator psi(p) = p / phi^{-1}(p) of the exponential-moment class.

    ``phi`` is a convex grid function with phi(0) = 0, nondecreasing on its
    nonnegative branch; the inverse is evaluated on the grid hull, and the
    table covers p in [2, phi(lambda_max)].
    """
    lo, hi = phi.hull
    if lo > 0 or hi <= 0:
        raise DomainError("phi grid must contain the nonnegative branch from 0")
    mask = phi.x >= 0
    lam = phi.x[mask]
    val = phi.values[mask]
    if lam[0] > 0:
        lam = np.concatenate([[0.0], lam])
        val = np.concatenate([[float(phi(0.0))], val])
    if abs(val[0]) > 1e-9 * max(1.0, abs(val).max()):
        raise DomainError("phi(0) must be 0")
    if np.any(np.diff(val) < 0):
        raise DomainError("phi must be nondecreasing on the nonnegative branch")
    p_top = float(val[-1])
    if p_top <= 2.0:
        raise HullError(f"phi grid tops out at phi={p_top:g} < 2; extend the lambda grid")
    # keep last lambda of any flat run so interp gives sup{lambda: phi <= p}
    keep = np.concatenate([np.diff(val) > 0, [True]])
    lam, val = lam[keep], val[keep]
    p = np.geomspace(2.0, p_top * (1 - 1e-12), n_points)
    lam_inv = np.interp(p, val, lam)
    return PsiFunction.tabulated(p, p / lam_inv)


def _psi_tilde_grid(psi: PsiFunction) -> ConvexGridFunction:
    grid = psi.support_grid()
    vals = psi.values_on(grid)
    return ConvexGridFunction(grid, grid * np.log(vals))


def tail_bound_from_gpsi(psi: PsiFunction, norm: float, z: float) -> float:
    """Tail bound  min(1, 2 exp(-(p log psi(p))^*(log(z / norm)))).

    The conjugation runs on the same grid machinery as the Orlicz module;
    for a point mass at r this collapses to the Markov bound 2 (norm/z)^r.
    Only claimed for z >= norm (domain error otherwise); nonincreasing in z.
    """
    norm = float(norm)
    z = float(z)
    if norm <= 0:
        raise DomainError("norm must be positive")
    if z < norm:
        raise DomainError("tail bound only claimed for z >= norm")
    a = np.log(z / norm)
    if psi.is_point_mass:
        r = psi.support[0]
        psi_r = psi.value(r)
        exponent = a * r - r * np.log(psi_r)
    else:
        exponent = conjugate_at(_psi_tilde_grid(psi), a)
    return float(min(1.0, 2.0 * np.exp(-exponent)))


def young_from_psi(
    psi: PsiFunction, u_max: float = 12.0, n_points: int = 513, small_u_coeff: float = None
) -> YoungFunction:
    """Reconstruct a Young function N with N(u) = exp((p log psi(p))^*(log u))
    for u > 3 and N(u) = C u^2 below, C defaulting to the continuity choice
    N(3)/9.  The reconstruction is exact only up to norm equivalence."""
    if u_max <= 3.0:
        raise DomainError("u_max must exceed the quadratic branch cutoff 3")
    tilde = _psi_tilde_grid(psi)
    u_hi = np.geomspace(3.0, u_max, n_points)
    n_hi = np.exp([conjugate_at(tilde, np.log(u)) for u in u_hi])
    c = float(small_u_coeff) if small_u_coeff is not None else float(n_hi[0]) / 9.0
    u_lo = np.linspace(0.0, 3.0, 129)[:-1]
    grid = np.concatenate([u_lo, u_hi])
    vals = np.concatenate([c * u_lo**2, n_hi])
    return YoungFunction("tabulated", {"z": grid, "phi": vals})

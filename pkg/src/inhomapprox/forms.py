"""Catalogue of target functions f: R^n -> R^ell and the regular-point check.

All ``evaluate`` methods are vectorised over leading axes and return an array
of shape ``(..., ell)``; scalar forms have ``ell == 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DimensionMismatch, EmptyZeroSet, NotDifferentiable, ValidationError


class Form:
    n: int
    ell: int = 1

    @property
    def degrees(self) -> tuple[float, ...] | None:
        """Degree vector, or None when the form is not homogeneous of one degree per component."""
        return None

    @property
    def total_degree(self) -> float:
        if self.degrees is None:
            raise ValidationError(f"{type(self).__name__} has no degree vector")
        return float(sum(self.degrees))

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.n,):
            raise DimensionMismatch(f"form expects {self.n} coordinates, got shape {x.shape}")
        return x

    def evaluate(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        """Jacobian ``D_x f`` as an ``(ell, n)`` array at a single point."""
        raise NotImplementedError

    def ray_interval(self, u: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        """Endpoints of ``{r >= 0 : lo <= f(r u) <= hi}`` for each row of ``u``.

        Only defined when that set is an interval for every direction; ``lo``
        and ``hi`` broadcast against ``(len(u), ell)``.  Returns ``(start,
        end)``; the interval is empty where ``start > end``.
        """
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


def _homogeneous_interval(a, d, lo, hi):
    # {r >= 0 : lo <= a r^d <= hi} for scalar slopes a
    a = np.asarray(a, dtype=float)
    lo = np.broadcast_to(lo, a.shape).astype(float)
    hi = np.broadcast_to(hi, a.shape).astype(float)
    start = np.full(a.shape, math.inf)
    end = np.zeros(a.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = a > 0
        ok = pos & (hi >= 0)
        start = np.where(ok, (np.maximum(lo, 0.0) / np.where(pos, a, 1.0)) ** (1.0 / d), start)
        end = np.where(ok, (hi / np.where(pos, a, 1.0)) ** (1.0 / d), end)
        neg = a < 0
        ok = neg & (lo <= 0)
        absa = np.where(neg, -a, 1.0)
        start = np.where(ok, (np.maximum(-hi, 0.0) / absa) ** (1.0 / d), start)
        end = np.where(ok, (-lo / absa) ** (1.0 / d), end)
        zero = (a == 0) & (lo <= 0) & (hi >= 0)
        start = np.where(zero, 0.0, start)
        end = np.where(zero, math.inf, end)
    return start, end


class _ScalarHomogeneous(Form):
    def ray_interval(self, u, lo, hi):
        u = self._check(u)
        a = self.evaluate(u)[..., 0]
        lo = np.broadcast_to(np.asarray(lo, dtype=float), a.shape + (1,))[..., 0]
        hi = np.broadcast_to(np.asarray(hi, dtype=float), a.shape + (1,))[..., 0]
        return _homogeneous_interval(a, self.degrees[0], lo, hi)


@dataclass(frozen=True)
class GeneralizedQuadratic(_ScalarHomogeneous):
    """``sum_{j<=p} |x_j|^beta - sum_{j>p} |x_j|^beta``."""

    p: int
    q: int
    beta: float = 2.0

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValidationError(f"generalized quadratic needs p >= 1 and q >= 1 (got p={self.p}, q={self.q})")
        if not self.beta > 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def degrees(self):
        return (float(self.beta),)

    @property
    def _signs(self) -> np.ndarray:
        return np.concatenate([np.ones(self.p), -np.ones(self.q)])

    def evaluate(self, x):
        x = self._check(x)
        powered = x * x if self.beta == 2 else np.abs(x) ** self.beta
        return (powered @ self._signs)[..., None]

    def gradient(self, x):
        x = self._check(x)
        if self.beta <= 1 and np.any(x == 0):
            raise NotDifferentiable(f"|x|^{self.beta} is not differentiable at a zero coordinate")
        g = self.beta * np.sign(x) * np.abs(x) ** (self.beta - 1) * self._signs
        return g[None, :]

    def to_config(self):
        return {"kind": "generalized_quadratic", "p": self.p, "q": self.q, "beta": self.beta}


@dataclass(frozen=True)
class CoordinateProduct(_ScalarHomogeneous):
    """``(prod |x_i|)^omega``; with ``signed`` the sign of ``prod x_i`` is kept."""

    n: int
    omega: float = 1.0
    signed: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("n must be at least 2")
        if not self.omega > 0:
            raise ValidationError(f"omega must be positive, got {self.omega}")

    @property
    def degrees(self):
        return (self.n * float(self.omega),)

    def evaluate(self, x):
        x = self._check(x)
        prod = np.prod(x, axis=-1)
        val = np.abs(prod) ** self.omega if self.omega != 1 else np.abs(prod)
        if self.signed:
            val = np.sign(prod) * val
        return val[..., None]

    def gradient(self, x):
        x = self._check(x)
        if self.signed and self.omega == 1:
            g = np.array([np.prod(np.delete(x, i)) for i in range(self.n)])
            return g[None, :]
        zeros = x == 0
        if zeros.any():
            if self.omega <= 1:
                raise NotDifferentiable("product form with omega <= 1 is not differentiable on coordinate hyperplanes")
            return np.zeros((1, self.n))
        f = self.evaluate(x)[0]
        return (self.omega * f / x)[None, :]

    def to_config(self):
        return {"kind": "coordinate_product", "n": self.n, "omega": self.omega, "signed": self.signed}


@dataclass(frozen=True)
class CoordinateMax(Form):
    """``max_{i<=p} |x_i|^{z_i}``; the last ``n - p`` coordinates are free.

    The form is not homogeneous of a single degree unless all ``z_i`` agree, so
    it exposes :attr:`criterion_exponent` ``sum 1/z_i`` instead of degrees.
    """

    n: int
    p: int
    z: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))
        if not 1 <= self.p <= self.n - 1:
            raise ValidationError(f"need 1 <= p <= n-1, got p={self.p}, n={self.n}")
        if len(self.z) != self.p or any(not v > 0 for v in self.z):
            raise ValidationError("z must hold p positive exponents")

    @property
    def criterion_exponent(self) -> float:
        return sum(1.0 / v for v in self.z)

    def evaluate(self, x):
        x = self._check(x)
        terms = np.abs(x[..., : self.p]) ** np.asarray(self.z)
        return terms.max(axis=-1)[..., None]

    def gradient(self, x):
        raise NotDifferentiable("the coordinate max form is not differentiable")

    def ray_interval(self, u, lo, hi):
        u = self._check(u)
        au = np.abs(u[..., : self.p])
        lo = np.broadcast_to(np.asarray(lo, dtype=float), u.shape[:-1] + (1,))[..., 0]
        hi = np.broadcast_to(np.asarray(hi, dtype=float), u.shape[:-1] + (1,))[..., 0]
        zinv = 1.0 / np.asarray(self.z)
        with np.errstate(divide="ignore", invalid="ignore"):
            reach_hi = np.where(au > 0, np.maximum(hi, 0.0)[..., None] ** zinv / au, math.inf)
            reach_lo = np.where(au > 0, np.maximum(lo, 0.0)[..., None] ** zinv / au, math.inf)
        end = np.where(hi >= 0, reach_hi.min(axis=-1), -1.0)
        start = np.where(lo <= 0, 0.0, reach_lo.min(axis=-1))
        return start, end

    def to_config(self):
        return {"kind": "coordinate_max", "n": self.n, "p": self.p, "z": list(self.z)}


@dataclass(frozen=True)
class Linear(_ScalarHomogeneous):
    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) < 2:
            raise ValidationError("linear form needs n >= 2 coefficients")

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @property
    def degrees(self):
        return (1.0,)

    def evaluate(self, x):
        x = self._check(x)
        return (x @ np.asarray(self.coeffs))[..., None]

    def gradient(self, x):
        self._check(x)
        return np.asarray(self.coeffs)[None, :]

    def to_config(self):
        return {"kind": "linear", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class VectorForm(Form):
    components: tuple[Form, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValidationError("vector form needs at least one component")
        dims = {c.n for c in self.components}
        if len(dims) != 1:
            raise ValidationError(f"components disagree on n: {sorted(dims)}")

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def ell(self) -> int:
        return sum(c.ell for c in self.components)

    @property
    def degrees(self):
        out = []
        for c in self.components:
            if c.degrees is None:
                return None
            out.extend(c.degrees)
        return tuple(out)

    def _slices(self):
        i = 0
        for c in self.components:
            yield c, slice(i, i + c.ell)
            i += c.ell

    def evaluate(self, x):
        x = self._check(x)
        return np.concatenate([c.evaluate(x) for c in self.components], axis=-1)

    def gradient(self, x):
        return np.vstack([c.gradient(x) for c in self.components])

    def ray_interval(self, u, lo, hi):
        u = self._check(u)
        shape = u.shape[:-1] + (self.ell,)
        lo = np.broadcast_to(np.asarray(lo, dtype=float), shape)
        hi = np.broadcast_to(np.asarray(hi, dtype=float), shape)
        start = np.zeros(u.shape[:-1])
        end = np.full(u.shape[:-1], math.inf)
        for c, sl in self._slices():
            s, e = c.ray_interval(u, lo[..., sl], hi[..., sl])
            start = np.maximum(start, s)
            end = np.minimum(end, e)
        return start, end

    def to_config(self):
        return {"kind": "vector", "components": [c.to_config() for c in self.components]}


@dataclass(frozen=True, eq=False)
class Pullback(Form):
    """``x -> base(h x + z)``: the composition ``f o g`` for an affine map g."""

    base: Form
    h: np.ndarray
    z: np.ndarray | None = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.base.n, self.base.n):
            raise DimensionMismatch(f"matrix shape {h.shape} does not match n={self.base.n}")
        z = np.zeros(self.base.n) if self.z is None else np.asarray(self.z, dtype=float)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def ell(self) -> int:
        return self.base.ell

    @property
    def degrees(self):
        return self.base.degrees if not np.any(self.z) else None

    def evaluate(self, x):
        x = self._check(x)
        return self.base.evaluate(x @ self.h.T + self.z)

    def gradient(self, x):
        x = self._check(x)
        return self.base.gradient(self.h @ x + self.z) @ self.h


def evaluate(form: Form, x) -> np.ndarray:
    return form.evaluate(x)


def evaluate_shifted(form: Form, xi, x) -> np.ndarray:
    """``-xi + f(x)``."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape != (form.ell,):
        raise DimensionMismatch(f"shift has {xi.size} entries, form has ell={form.ell}")
    if not np.all(np.isfinite(xi)):
        raise ValidationError("shift entries must be finite")
    return form.evaluate(x) - xi


def gradient(form: Form, x) -> np.ndarray:
    return form.gradient(x)


def parse_form(spec: dict) -> Form:
    kind = spec["kind"].lower()
    if kind in ("generalized_quadratic", "gq"):
        form = GeneralizedQuadratic(int(spec["p"]), int(spec["q"]), float(spec.get("beta", 2.0)))
        if "n" in spec and int(spec["n"]) != form.n:
            raise ValidationError(f"p + q must equal n (p={form.p}, q={form.q}, n={spec['n']})")
        return form
    if kind in ("coordinate_product", "product"):
        return CoordinateProduct(int(spec["n"]), float(spec.get("omega", 1.0)), bool(spec.get("signed", False)))
    if kind in ("coordinate_max", "max"):
        return CoordinateMax(int(spec["n"]), int(spec["p"]), tuple(spec["z"]))
    if kind == "linear":
        return Linear(tuple(spec["coeffs"]))
    if kind in ("vector", "vector_form"):
        return VectorForm(tuple(parse_form(c) for c in spec["components"]))
    raise ValidationError(f"unknown form kind {spec['kind']!r}")


# -- regular points on the zero set ------------------------------------------


class Regularity(enum.Enum):
    REGULAR = "regular"
    SINGULAR = "singular"
    NOT_APPLICABLE = "not_applicable"


@dataclass
class RegularityReport:
    status: Regularity
    witness: np.ndarray | None = None
    zeros_found: int = 0
    min_singular_value: float = math.nan
    scale: float = math.nan


def _unit(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _scalar_zeros(form: Form, samples: int, rng, budget: int) -> np.ndarray:
    drawn = _unit(rng.standard_normal((budget, form.n)))
    vals = form.evaluate(drawn)[:, 0]
    pos, neg = drawn[vals > 0], drawn[vals < 0]
    if len(pos) == 0 or len(neg) == 0:
        raise EmptyZeroSet("f has constant sign on all sampled directions", reason="no_sign_change")
    m = min(samples, len(pos), len(neg))
    a = pos[rng.integers(0, len(pos), m)]
    b = neg[rng.integers(0, len(neg), m)]
    keep = np.einsum("ij,ij->i", a, b) > -0.999
    a, b = a[keep], b[keep]
    lo = np.zeros(len(a))
    hi = np.ones(len(a))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pts = _unit((1 - mid)[:, None] * a + mid[:, None] * b)
        positive = form.evaluate(pts)[:, 0] > 0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
    return _unit((1 - lo)[:, None] * a + lo[:, None] * b)


def _newton_zeros(form: Form, samples: int, rng, budget: int) -> np.ndarray:
    found = []
    for _ in range(budget):
        x = _unit(rng.standard_normal(form.n))
        for _ in range(100):
            fx = form.evaluate(x)
            jac = form.gradient(x)
            step = np.linalg.lstsq(jac, fx, rcond=None)[0]
            damp = 1.0
            while damp > 1e-4:
                cand = _unit(x - damp * step)
                if np.linalg.norm(form.evaluate(cand)) < np.linalg.norm(fx):
                    break
                damp *= 0.5
            x = cand
            if np.linalg.norm(form.evaluate(x)) < 1e-13:
                found.append(x)
                break
        if len(found) >= samples:
            break
    if not found:
        raise EmptyZeroSet("damped Newton found no common zero on the sphere", reason="budget")
    return np.array(found)


def _smallest_singular(form: Form, pts: np.ndarray):
    sig = np.array([np.linalg.svd(form.gradient(x), compute_uv=False) for x in pts])
    return sig.min(axis=1), sig.max(axis=1)


def _refine_singular(form: Form, x0: np.ndarray):
    # solve J(x)^T lam = 0, f(x) = 0, |x| = 1, |lam| = 1
    jac = form.gradient(x0)
    lam0 = np.linalg.svd(jac)[0][:, -1]
    n = form.n

    def residual(v):
        x, lam = v[:n], v[n:]
        return np.concatenate([form.gradient(x).T @ lam, form.evaluate(x), [x @ x - 1.0, lam @ lam - 1.0]])

    res = least_squares(residual, np.concatenate([x0, lam0]), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    return _unit(res.x[:n]), float(np.linalg.norm(res.fun))


def _differentiable_proxy(form: Form) -> Form:
    # the signed product has the same zero set as the unsigned one
    if isinstance(form, CoordinateProduct) and not form.signed:
        return CoordinateProduct(form.n, form.omega, signed=True)
    if isinstance(form, VectorForm):
        return VectorForm(tuple(_differentiable_proxy(c) for c in form.components))
    return form


def is_regular_on_zero_set(form: Form, samples: int = 200, seed: int = 0, tol: float = 1e-8,
                           budget: int = 20000) -> RegularityReport:
    """Sample ``Z(f)`` on the unit sphere and test the Jacobian rank there.

    Scalar forms: bisect along arcs joining a positive and a negative
    direction.  Vector forms: damped Gauss-Newton from random directions.
    The zeros with the smallest singular value are then pushed towards an
    exact singular zero by solving ``J^T lam = 0`` on the zero set; a zero whose
    smallest singular value drops below ``tol`` times the largest singular
    value seen on the sampled zeros is returned as the witness.
    """
    if samples <= 0:
        raise ValidationError("samples must be positive")
    if isinstance(form, CoordinateMax) or (
        isinstance(form, VectorForm) and any(isinstance(c, CoordinateMax) for c in form.components)
    ):
        return RegularityReport(Regularity.NOT_APPLICABLE)
    work = _differentiable_proxy(form)
    if isinstance(work, GeneralizedQuadratic) and work.beta <= 1:
        raise NotDifferentiable("F_{p,q,beta} with beta <= 1 is not differentiable on its zero set")
    if isinstance(work, CoordinateProduct) and work.omega < 1:
        raise NotDifferentiable("product form with omega < 1 is not differentiable on its zero set")
    rng = np.random.default_rng(seed)
    if work.ell == 1:
        zeros = _scalar_zeros(work, samples, rng, budget)
    else:
        zeros = _newton_zeros(work, samples, rng, max(samples * 5, 50))
    smin, smax = _smallest_singular(work, zeros)
    scale = float(smax.max())
    if scale == 0:
        return RegularityReport(Regularity.SINGULAR, zeros[0], len(zeros), 0.0, 0.0)
    order = np.argsort(smin)
    best = float(smin[order[0]])
    if best < tol * scale:
        return RegularityReport(Regularity.SINGULAR, zeros[order[0]], len(zeros), best, scale)
    for idx in order[:5]:
        x, resid = _refine_singular(work, zeros[idx])
        s = float(np.linalg.svd(work.gradient(x), compute_uv=False).min())
        if resid < 1e-9 and s < tol * scale:
            return RegularityReport(Regularity.SINGULAR, x, len(zeros), s, scale)
        best = min(best, s) if resid < 1e-9 else best
    return RegularityReport(Regularity.REGULAR, None, len(zeros), best, scale)

"""Approximating functions and exact convergence decisions for the power-log class.

A criterion integrand or series term over power-log inputs always reduces to
``t^A (log t)^B`` or ``2^{kC} k^D``; the decisions below work on those
exponents in exact rational arithmetic, so boundary cases such as ``A == -1``
are never decided by a floating-point tolerance.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import InvalidDegrees, UnsupportedPsiClass, ValidationError
from .forms import CoordinateMax, CoordinateProduct, Form


def _exact(x) -> Fraction:
    # decimal inputs (configs, literals) become exact rationals
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


class PsiComponent:
    scale: float = 1.0

    def __call__(self, t):
        raise NotImplementedError

    @property
    def sup(self) -> float:
        """Supremum over t >= 0 (attained at t = 0 for a nonincreasing function)."""
        return float(self(0.0))

    def scaled(self, c: float) -> "PsiComponent":
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLog(PsiComponent):
    """``t^{-s} (log t)^eps`` beyond ``t_star``, constant plateau below it."""

    s: float
    eps: float = 0.0
    t_star: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValidationError(f"power-log psi needs s > 0 so that it is nonincreasing, got s={self.s}")
        if not self.scale > 0:
            raise ValidationError("scale must be positive")
        floor = math.exp(max(1.0, self.eps / self.s))
        t_star = floor if self.t_star is None else float(self.t_star)
        if t_star < floor * (1 - 1e-12):
            raise ValidationError(f"t_star={t_star} is below exp(max(1, eps/s)) = {floor}; tail would not be monotone")
        object.__setattr__(self, "t_star", t_star)

    def _tail(self, t):
        return t ** (-self.s) * np.log(t) ** self.eps

    def __call__(self, t):
        t = np.maximum(np.asarray(t, dtype=float), self.t_star)
        out = self.scale * self._tail(t)
        return out if out.ndim else float(out)

    def scaled(self, c):
        return PowerLog(self.s, self.eps, self.t_star, self.scale * c)


@dataclass(frozen=True)
class Constant(PsiComponent):
    c: float

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValidationError(f"constant psi must be positive and finite, got {self.c}")

    @property
    def scale(self) -> float:
        return 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.c)
        return out if out.ndim else float(out)

    def scaled(self, c):
        return Constant(self.c * c)


@dataclass(frozen=True, eq=False)
class Tabulated(PsiComponent):
    """Piecewise-linear through ``knots``, constant outside the knot range."""

    knots: tuple[tuple[float, float], ...]
    scale: float = 1.0

    def __post_init__(self):
        pts = np.asarray(self.knots, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 1:
            raise ValidationError("tabulated psi needs a list of (t, value) pairs")
        if np.any(np.diff(pts[:, 0]) <= 0):
            raise ValidationError("knot abscissae must be strictly increasing")
        if np.any(pts[:, 1] <= 0) or np.any(np.diff(pts[:, 1]) > 0):
            raise ValidationError("knot values must be positive and nonincreasing")
        object.__setattr__(self, "knots", tuple(map(tuple, pts.tolist())))

    def __call__(self, t):
        pts = np.asarray(self.knots)
        out = self.scale * np.interp(np.asarray(t, dtype=float), pts[:, 0], pts[:, 1])
        return out if np.ndim(out) else float(out)

    def scaled(self, c):
        return Tabulated(self.knots, self.scale * c)


@dataclass(frozen=True)
class Psi:
    components: tuple[PsiComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValidationError("psi needs at least one component")

    @property
    def ell(self) -> int:
        return len(self.components)

    def __call__(self, t) -> np.ndarray:
        """Shape ``(..., ell)``."""
        t = np.asarray(t, dtype=float)
        return np.stack([np.broadcast_to(c(t), t.shape) for c in self.components], axis=-1)

    @property
    def sup(self) -> np.ndarray:
        return np.array([c.sup for c in self.components])

    def scaled(self, c: float) -> "Psi":
        return Psi(tuple(comp.scaled(c) for comp in self.components))

    @property
    def is_constant(self) -> bool:
        return all(isinstance(c, Constant) for c in self.components)


def eval_psi(psi: Psi, t: float) -> np.ndarray:
    if t < 0:
        raise ValidationError("psi is defined on t >= 0")
    return psi(t)


def parse_psi(spec: Any) -> Psi:
    if isinstance(spec, Psi):
        return spec
    if isinstance(spec, dict) and "components" in spec:
        spec = spec["components"]
    specs = spec if isinstance(spec, list) else [spec]
    comps = []
    for s in specs:
        kind = s["kind"].lower()
        if kind in ("power_log", "powerlog", "phi"):
            comps.append(PowerLog(float(s["s"]), float(s.get("eps", 0.0)), s.get("t_star"), float(s.get("scale", 1.0))))
        elif kind == "constant":
            comps.append(Constant(float(s["c"])))
        elif kind == "tabulated":
            comps.append(Tabulated(tuple(tuple(k) for k in s["knots"])))
        else:
            raise ValidationError(f"unknown psi kind {s['kind']!r}")
    return Psi(tuple(comps))


def psi_to_config(psi: Psi) -> list:
    out = []
    for c in psi.components:
        if isinstance(c, PowerLog):
            out.append({"kind": "power_log", "s": c.s, "eps": c.eps, "t_star": c.t_star, "scale": c.scale})
        elif isinstance(c, Constant):
            out.append({"kind": "constant", "c": c.c})
        else:
            out.append({"kind": "tabulated", "knots": [list(k) for k in c.knots], "scale": c.scale})
    return out


def regularity_certificate(psi: Psi, a: float, t_max: float = 1e9, grid: int = 4000,
                           floor: float = 1e-12) -> float | None:
    """Largest ``b`` with ``b psi(t) <= psi(a t)`` componentwise, or None.

    Validated on a log grid up to ``t_max``; power-log tails add the analytic
    limit ``a^{-s}`` of the ratio.  None means the grid infimum collapses
    below ``floor``, i.e. psi is not regular for this ``a``.
    """
    if not a > 1:
        raise ValidationError("regularity needs a > 1")
    t = np.concatenate([[0.0], np.logspace(-3, math.log10(t_max), grid)])
    b = math.inf
    for comp in psi.components:
        ratio = np.asarray(comp(a * t)) / np.asarray(comp(t))
        b = min(b, float(ratio.min()))
        if isinstance(comp, PowerLog):
            b = min(b, a ** (-comp.s))
    if b < floor:
        return None
    return b


# -- criteria ----------------------------------------------------------------


class Family(enum.Enum):
    REGULAR_ZERO_SET = "regular"
    PRODUCT = "product"
    MAX = "max"


class Verdict(enum.Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"


@dataclass(frozen=True)
class CriterionVerdict:
    value: Verdict
    family: Family
    xi_branch: str  # "zero" or "nonzero"
    exponents: tuple[Fraction, Fraction]

    @property
    def convergent(self) -> bool:
        return self.value is Verdict.CONVERGENT


def family_for(form: Form) -> Family:
    if isinstance(form, CoordinateProduct):
        return Family.PRODUCT
    if isinstance(form, CoordinateMax):
        return Family.MAX
    return Family.REGULAR_ZERO_SET


def parse_family(spec: Any) -> Family:
    if isinstance(spec, Family):
        return spec
    key = str(spec).lower().replace("-", "_")
    aliases = {"regular": Family.REGULAR_ZERO_SET, "regular_zero_set": Family.REGULAR_ZERO_SET,
               "regularzeroset": Family.REGULAR_ZERO_SET, "product": Family.PRODUCT, "max": Family.MAX}
    if key not in aliases:
        raise ValidationError(f"unknown criterion family {spec!r}")
    return aliases[key]


def _power_log_exponents(psi: Psi) -> list[tuple[Fraction, Fraction]]:
    # psi_j(t) ~ t^{-s_j} (log t)^{eps_j}; constants are s = eps = 0
    out = []
    for c in psi.components:
        if isinstance(c, PowerLog):
            out.append((_exact(c.s), _exact(c.eps)))
        elif isinstance(c, Constant):
            out.append((Fraction(0), Fraction(0)))
        else:
            raise UnsupportedPsiClass("exact criteria are only decided for power-log and constant psi")
    return out


def _shift_branch(xi, family: Family) -> tuple[str, np.ndarray]:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if family is not Family.REGULAR_ZERO_SET and np.any(xi < 0):
        raise ValidationError("product and max criteria are stated for xi >= 0")
    return ("zero" if np.all(xi == 0) else "nonzero"), xi


def _check_family(form: Form, psi: Psi, family: Family):
    if family is Family.REGULAR_ZERO_SET:
        if form.degrees is None:
            raise ValidationError("the regular zero-set criterion needs a homogeneous form")
        if psi.ell != form.ell:
            raise ValidationError(f"psi has {psi.ell} components, form has ell={form.ell}")
    elif family is Family.PRODUCT:
        if not isinstance(form, CoordinateProduct):
            raise ValidationError("product criterion needs a coordinate product form")
    elif not isinstance(form, CoordinateMax):
        raise ValidationError("max criterion needs a coordinate max form")
    if family is not Family.REGULAR_ZERO_SET and psi.ell != 1:
        raise ValidationError("product and max criteria take a scalar psi")


def integral_exponents(form: Form, psi: Psi, xi, family) -> tuple[tuple[Fraction, Fraction], str]:
    """``(A, B)`` with the criterion integrand ``~ t^A (log t)^B``, and the shift branch."""
    family = parse_family(family)
    _check_family(form, psi, family)
    branch, _ = _shift_branch(xi, family)
    exps = _power_log_exponents(psi)
    n = form.n
    if family is Family.REGULAR_ZERO_SET:
        d = sum(_exact(v) for v in form.degrees)
        return (n - d - 1 - sum(s for s, _ in exps), sum(e for _, e in exps)), branch
    (s, e), = exps
    if family is Family.PRODUCT:
        w = Fraction(1) / _exact(form.omega) if branch == "zero" else Fraction(1)
        return (-1 - s * w, e * w + n - 2), branch
    z = sum(Fraction(1) / _exact(v) for v in form.z) if branch == "zero" else Fraction(1)
    return (n - form.p - 1 - s * z, e * z), branch


def series_exponents(form: Form, psi: Psi, xi, family) -> tuple[tuple[Fraction, Fraction], str]:
    """``(C, D)`` with the bracketed series term ``~ 2^{kC} k^D``."""
    family = parse_family(family)
    _check_family(form, psi, family)
    branch, _ = _shift_branch(xi, family)
    exps = _power_log_exponents(psi)
    n = form.n
    if family is Family.REGULAR_ZERO_SET:
        d = sum(_exact(v) for v in form.degrees)
        if d >= n:
            raise InvalidDegrees(f"uniform criterion needs d < n (d={float(d)}, n={n})")
        return (n - d - sum(s for s, _ in exps), sum(e for _, e in exps)), branch
    (s, e), = exps
    if family is Family.PRODUCT:
        w = Fraction(1) / _exact(form.omega) if branch == "zero" else Fraction(1)
        return (-s * w, n - 1 + e * w), branch
    z = sum(Fraction(1) / _exact(v) for v in form.z) if branch == "zero" else Fraction(1)
    return (n - form.p - s * z, e * z), branch


def asymptotic_criterion(form: Form, psi: Psi, xi, family=None) -> CriterionVerdict:
    """Decide finiteness of the asymptotic criterion integral.

    Convergent means almost no ``g`` gives an approximable ``(xi-shifted f) o g``;
    Divergent means almost every ``g`` does.
    """
    family = family_for(form) if family is None else parse_family(family)
    (A, B), branch = integral_exponents(form, psi, xi, family)
    conv = A < -1 or (A == -1 and B < -1)
    return CriterionVerdict(Verdict.CONVERGENT if conv else Verdict.DIVERGENT, family, branch, (A, B))


def uniform_series_criterion(form: Form, psi: Psi, xi, r: float = 2.0, family=None) -> CriterionVerdict:
    """Decide convergence of ``sum_k [2^{kC} k^D]^{1-r}``.

    Convergent means uniform approximability holds for almost every ``g``;
    Divergent means the sufficient condition is not met.
    """
    if not r > 1:
        raise ValidationError("the Rogers exponent r must exceed 1")
    family = family_for(form) if family is None else parse_family(family)
    (C, D), branch = series_exponents(form, psi, xi, family)
    one_minus_r = 1 - _exact(r)
    conv = C * one_minus_r < 0 or (C == 0 and D * one_minus_r < -1)
    return CriterionVerdict(Verdict.CONVERGENT if conv else Verdict.DIVERGENT, family, branch, (C, D))


def numeric_tail_report(form: Form, psi: Psi, xi, family=None,
                        probes: Sequence[float] = (1e2, 1e4, 1e8, 1e12)) -> list[tuple[float, float]]:
    """Partial integrals ``int_e^T integrand`` at the probe values of T.

    The only report available for tabulated psi: no verdict is derived.
    """
    from scipy.integrate import quad

    family = family_for(form) if family is None else parse_family(family)
    _check_family(form, psi, family)
    branch, _ = _shift_branch(xi, family)
    n = form.n

    def integrand(t):
        vals = psi(t)
        if family is Family.REGULAR_ZERO_SET:
            return t ** (n - form.total_degree - 1) * float(np.prod(vals))
        v = float(vals[0])
        if family is Family.PRODUCT:
            w = 1.0 / form.omega if branch == "zero" else 1.0
            return v ** w / t * math.log(t) ** (n - 2)
        z = form.criterion_exponent if branch == "zero" else 1.0
        return v ** z * t ** (n - form.p - 1)

    out, total, lo = [], 0.0, math.e
    for T in probes:
        # integrate in u = log t for stability over many decades
        part, _ = quad(lambda u: integrand(math.exp(u)) * math.exp(u), math.log(lo), math.log(T), limit=400)
        total += part
        out.append((float(T), total))
        lo = T
    return out

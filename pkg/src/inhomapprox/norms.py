"""Norms on R^n, operator norms of matrices, and norm-equivalence constants.

Every supported norm has the shape ``x -> ||W x||_p`` for a positive diagonal
weight ``W`` (identity when unweighted) and ``p`` in ``[1, inf]``.  That single
representation makes equivalence constants and coordinate bounds closed-form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionMismatch, SingularMatrix, ValidationError

_BASE_P = {"euclidean": 2.0, "sup": math.inf, "l1": 1.0}


@dataclass(frozen=True)
class Norm:
    """A weighted p-norm.

    ``kind`` is one of ``"euclidean"``, ``"sup"``, ``"l1"``, ``"lp"`` or
    ``"weighted"``.  For ``"lp"`` the exponent is ``p``; for ``"weighted"``
    the weights are ``weights`` and the underlying norm is ``base``.
    """

    kind: str = "euclidean"
    p: float | None = None
    weights: tuple[float, ...] | None = None
    base: "Norm | None" = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind in _BASE_P:
            return
        if self.kind == "lp":
            if self.p is None or not self.p >= 1:
                raise ValidationError(f"lp norm needs p >= 1, got {self.p}")
            return
        if self.kind == "weighted":
            if not self.weights or any(not (w > 0 and math.isfinite(w)) for w in self.weights):
                raise ValidationError("weighted norm needs positive finite weights")
            base = self.base if self.base is not None else Norm("sup")
            if base.kind == "weighted":
                raise ValidationError("nested weighted norms are not supported")
            object.__setattr__(self, "base", base)
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
            return
        raise ValidationError(f"unknown norm kind {self.kind!r}")

    @property
    def exponent(self) -> float:
        if self.kind == "weighted":
            return self.base.exponent
        if self.kind == "lp":
            return float(self.p)
        return _BASE_P[self.kind]

    def weight_vector(self, n: int) -> np.ndarray:
        if self.kind != "weighted":
            return np.ones(n)
        if len(self.weights) != n:
            raise DimensionMismatch(f"norm has {len(self.weights)} weights, vector has {n} coordinates")
        return np.asarray(self.weights, dtype=float)

    def __call__(self, x) -> np.ndarray | float:
        """Evaluate along the last axis."""
        x = np.asarray(x, dtype=float)
        if self.kind == "weighted":
            x = x * self.weight_vector(x.shape[-1])
        p = self.exponent
        a = np.abs(x)
        if p == 2.0:
            out = np.sqrt(np.einsum("...i,...i->...", a, a))
            extreme = (out < 1e-150) | (out > 1e150)
            if np.any(extreme):
                # squares under- or overflow: rescale by the largest entry
                scale = a.max(axis=-1)
                safe = np.where(scale > 0, scale, 1.0)
                rescaled = np.sqrt(np.sum((a / safe[..., None]) ** 2, axis=-1)) * safe
                out = np.where(extreme, rescaled, out)
        elif p == math.inf:
            out = a.max(axis=-1)
        elif p == 1.0:
            out = a.sum(axis=-1)
        else:
            scale = a.max(axis=-1, keepdims=True)
            safe = np.where(scale > 0, scale, 1.0)
            out = (np.sum((a / safe) ** p, axis=-1) ** (1.0 / p)) * safe[..., 0]
        return out if out.ndim else float(out)

    def coordinate_bounds(self, n: int) -> np.ndarray:
        """Per-coordinate ``c_i`` with ``|x_i| <= c_i * nu(x)``."""
        return 1.0 / self.weight_vector(n)

    def to_config(self) -> Any:
        if self.kind in _BASE_P:
            return self.kind
        if self.kind == "lp":
            return {"lp": self.p}
        return {"weighted": list(self.weights), "base": self.base.to_config()}


def norm_eval(nu: Norm, x) -> float:
    return nu(x)


def parse_norm(spec: Any) -> Norm:
    """Build a norm from its config form (see README for the schema)."""
    if isinstance(spec, Norm):
        return spec
    if isinstance(spec, str):
        return Norm(spec.lower())
    if isinstance(spec, dict):
        if "lp" in spec:
            p = spec["lp"]
            return Norm("sup") if p in ("inf", math.inf) else Norm("lp", p=float(p))
        if "weighted" in spec:
            base = parse_norm(spec.get("base", "sup"))
            return Norm("weighted", weights=tuple(spec["weighted"]), base=base)
    raise ValidationError(f"cannot parse norm spec {spec!r}")


def _pnorm_ratio(p_from: float, p_to: float, n: int) -> float:
    # sup ||x||_{p_to} / ||x||_{p_from}
    inv_from = 0.0 if p_from == math.inf else 1.0 / p_from
    inv_to = 0.0 if p_to == math.inf else 1.0 / p_to
    return float(n) ** max(inv_to - inv_from, 0.0)


def upper_constant(nu1: Norm, nu2: Norm, n: int) -> float:
    """A constant ``a`` with ``nu2(x) <= a * nu1(x)`` for all x."""
    w1 = nu1.weight_vector(n)
    w2 = nu2.weight_vector(n)
    return float(w2.max() / w1.min() * _pnorm_ratio(nu1.exponent, nu2.exponent, n))


def equivalence_constant(nu1: Norm, nu2: Norm, n: int) -> float:
    """``C >= 1`` with ``nu1 / C <= nu2 <= C * nu1``."""
    return max(upper_constant(nu1, nu2, n), upper_constant(nu2, nu1, n), 1.0)


def _check_square(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {h.shape}")
    cond = np.linalg.cond(h)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularMatrix("matrix is singular to working precision")
    return h


def operator_norm(nu: Norm, h, samples: int = 0, seed: int = 0) -> float:
    """Upper bound for ``sup nu(h x) / nu(x)``.

    Exact for the Euclidean, sup and l1 norms and their weighted versions.
    For a general ``lp`` base the Riesz-Thorin bound
    ``||h||_1^(1/p) ||h||_inf^(1-1/p)`` is returned; it is never below the true
    value.  ``samples`` > 0 additionally evaluates a sampled lower bound and
    asserts consistency, which is only useful as a self-check.
    """
    h = _check_square(h)
    n = h.shape[0]
    w = nu.weight_vector(n)
    hw = (w[:, None] * h) / w[None, :]
    p = nu.exponent
    if p == 2.0:
        value = float(np.linalg.norm(hw, 2))
    elif p == math.inf:
        value = float(np.abs(hw).sum(axis=1).max())
    elif p == 1.0:
        value = float(np.abs(hw).sum(axis=0).max())
    else:
        one = np.abs(hw).sum(axis=0).max()
        inf = np.abs(hw).sum(axis=1).max()
        value = float(one ** (1.0 / p) * inf ** (1.0 - 1.0 / p))
    if samples:
        lower = operator_norm_lower(nu, h, samples, seed)
        assert lower <= value * (1 + 1e-9), (lower, value)
    return value


def operator_norm_lower(nu: Norm, h, samples: int, seed: int = 0) -> float:
    """Sampled lower bound ``max nu(h x)/nu(x)`` over random directions."""
    h = np.asarray(h, dtype=float)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, h.shape[0]))
    # include the coordinate axes and sign patterns of the cube corners
    x = np.vstack([x, np.eye(h.shape[0]), np.sign(rng.standard_normal((64, h.shape[0])))])
    return float(np.max(nu(x @ h.T) / nu(x)))

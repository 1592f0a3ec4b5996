"""Integer point sets and their enumeration in norm balls, annuli and ellipsoids.

Plain annulus enumeration scans the integer bounding box slab by slab (first
coordinate outermost) so that points come out in lexicographic order.
Counting in a transformed lattice ``g P`` walks the ellipsoid
``{v : |h v + z|_2 <= R}`` coordinate by coordinate instead, which visits
only points inside the ellipsoid and never misses one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from .errors import BudgetExceeded, ValidationError
from .geometry import Region
from .norms import Norm, upper_constant
from .sampling import GroupElement

DEFAULT_CAP = 2 * 10**9
_EUCLIDEAN = Norm("euclidean")


@dataclass(frozen=True)
class PointSet:
    """``kind`` is ``"nonzero"``, ``"primitive"``, ``"congruence"`` (with modulus ``q``) or ``"all"``."""

    kind: str = "nonzero"
    q: int = 1

    def __post_init__(self):
        if self.kind not in ("nonzero", "primitive", "congruence", "all"):
            raise ValidationError(f"unknown point set kind {self.kind!r}")
        if self.q < 1:
            raise ValidationError("congruence modulus must be a positive integer")

    def contains(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        if self.kind == "all":
            return np.ones(v.shape[:-1], dtype=bool)
        if self.kind == "nonzero":
            return np.any(v != 0, axis=-1)
        ok = np.gcd.reduce(np.abs(v), axis=-1) == 1
        if self.kind == "congruence" and self.q > 1:
            ok &= (v[..., 0] % self.q == 1) & np.all(v[..., 1:] % self.q == 0, axis=-1)
        return ok

    def to_config(self) -> Any:
        return {"primitive_congruence": self.q} if self.kind == "congruence" else self.kind


def parse_point_set(spec: Any) -> PointSet:
    if isinstance(spec, PointSet):
        return spec
    if isinstance(spec, str):
        key = spec.lower()
        aliases = {"nonzero": "nonzero", "nonzeroint": "nonzero", "primitive": "primitive", "all": "all", "allint": "all"}
        if key in aliases:
            return PointSet(aliases[key])
    if isinstance(spec, dict):
        for key in ("primitive_congruence", "congruence"):
            if key in spec:
                return PointSet("congruence", int(spec[key]))
    raise ValidationError(f"cannot parse point set {spec!r}")


# -- box scan ----------------------------------------------------------------


def _box(radii: np.ndarray) -> np.ndarray:
    axes = [np.arange(-r, r + 1, dtype=np.int64) for r in radii]
    if not axes:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=-1)


def annulus_blocks(ps: PointSet, nu: Norm, n: int, S: float, T: float,
                   cap: int = DEFAULT_CAP) -> Iterator[np.ndarray]:
    """Blocks of the points ``v in P`` with ``S < nu(v) <= T`` in lexicographic order.

    ``S == 0`` admits the origin (relevant only for ``"all"``).
    """
    if not 0 <= S <= T:
        raise ValidationError(f"annulus needs 0 <= S <= T, got S={S}, T={T}")
    if not math.isfinite(T):
        raise ValidationError("annulus must be bounded")
    radii = np.floor(T * nu.coordinate_bounds(n) + 1e-9).astype(np.int64)
    total = float(np.prod(2.0 * radii + 1))
    if total > cap:
        raise BudgetExceeded(f"bounding box holds {total:.3g} points, cap is {cap:.3g}")
    rest = _box(radii[1:])
    for first in range(-radii[0], radii[0] + 1):
        slab = np.empty((len(rest), n), dtype=np.int64)
        slab[:, 0] = first
        slab[:, 1:] = rest
        r = np.asarray(nu(slab))
        keep = ((r > S) | (S == 0)) & (r <= T)
        keep &= ps.contains(slab)
        if keep.any():
            yield slab[keep]


def enumerate_annulus(ps: PointSet, nu: Norm, n: int, S: float, T: float,
                      cap: int = DEFAULT_CAP) -> Iterator[tuple[int, ...]]:
    for block in annulus_blocks(ps, nu, n, S, T, cap):
        for row in block:
            yield tuple(int(c) for c in row)


def sup_shell(n: int, m: int) -> np.ndarray:
    """All integer points with sup norm exactly ``m``, lexicographic."""
    if m == 0:
        return np.zeros((1, n), dtype=np.int64)
    if n == 1:
        return np.array([[-m], [m]], dtype=np.int64)
    parts = []
    face = _box(np.full(n - 1, m))
    inner = sup_shell(n - 1, m)
    for first in range(-m, m + 1):
        rest = face if abs(first) == m else inner
        block = np.empty((len(rest), n), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = rest
        parts.append(block)
    return np.concatenate(parts)


# -- ellipsoid scan ----------------------------------------------------------


def ellipsoid_blocks(h, z, radius: float, cap: int = DEFAULT_CAP) -> Iterator[np.ndarray]:
    """Integer ``v`` with ``|h v + z|_2 <= radius`` (up to a tiny outward margin), lexicographic.

    Callers filter the exact condition afterwards; the margin only guards
    against losing boundary points to rounding.
    """
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    z = np.zeros(n) if z is None else np.asarray(z, dtype=float)
    hinv = np.linalg.inv(h)
    center = -hinv @ z
    cov = hinv @ hinv.T
    expected = (math.pi ** (n / 2) / math.gamma(n / 2 + 1)) * radius**n / abs(np.linalg.det(h))
    if expected > cap:
        raise BudgetExceeded(f"ellipsoid holds about {expected:.3g} points, cap is {cap:.3g}")
    # projected Gram matrices of the leading coordinates
    grams = [np.linalg.inv(cov[:k, :k]) for k in range(1, n + 1)]
    r2 = radius * radius

    def bounds(prefix: np.ndarray, k: int):
        # range of coordinate k (0-based) given the first k coordinates
        g = grams[k]
        d = prefix - center[:k]
        a = np.einsum("ij,jk,ik->i", d, g[:k, :k], d) if k else np.zeros(len(prefix))
        b = d @ g[:k, k] if k else np.zeros(len(prefix))
        c = g[k, k]
        disc = b * b - c * (a - r2)
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = center[k] + (-b - root) / c
        hi = center[k] + (-b + root) / c
        margin = 1e-9 * (1.0 + np.abs(lo) + np.abs(hi))
        lo = np.ceil(lo - margin).astype(np.int64)
        hi = np.floor(hi + margin).astype(np.int64)
        hi = np.where(disc >= -1e-9 * r2, hi, lo - 1)
        return lo, hi

    def expand(prefix: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        rows = np.repeat(np.arange(len(prefix)), counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        out = np.empty((total, prefix.shape[1] + 1), dtype=np.int64)
        out[:, :-1] = prefix[rows]
        out[:, -1] = lo[rows] + offsets
        return out

    lo0, hi0 = bounds(np.zeros((1, 0)), 0)
    for first in range(int(lo0[0]), int(hi0[0]) + 1):
        level = np.array([[first]], dtype=np.int64)
        for k in range(1, n):
            lo, hi = bounds(level.astype(float), k)
            level = expand(level, lo, hi)
            if not len(level):
                break
        if len(level):
            yield level


def candidate_blocks(nu: Norm, g: GroupElement, radius: float,
                     cap: int = DEFAULT_CAP) -> Iterator[np.ndarray]:
    """Blocks of integer ``v`` covering ``{v : nu(g v) <= radius}``; not yet filtered by ``nu``.

    Untransformed non-Euclidean balls use the box scan; everything else is
    covered by the Euclidean ball of radius ``radius * a`` with
    ``|x|_2 <= a nu(x)``, walked as an ellipsoid in ``v``.
    """
    n = g.n
    if np.array_equal(g.h, np.eye(n)) and not np.any(g.z) and nu.exponent != 2.0:
        yield from annulus_blocks(PointSet("all"), nu, n, 0.0, radius, cap)
        return
    yield from ellipsoid_blocks(g.h, g.z, radius * upper_constant(nu, _EUCLIDEAN, n), cap)


def region_hits(ps: PointSet, g: GroupElement, region: Region,
                cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """All ``v in P`` with ``g v`` in the region, as ``(v, g v)`` arrays."""
    if not math.isfinite(region.T):
        raise ValidationError("counting needs a bounded region (finite T)")
    vs, ws = [], []
    sup = region.bound_sup
    for block in candidate_blocks(region.ball, g, region.T, cap):
        w = g.apply(block)
        dev = np.abs(region.form.evaluate(w) - region.xi)
        mask = np.all(dev <= sup, axis=-1)
        if not mask.any():
            continue
        v, w = block[mask], w[mask]
        keep = region.contains(w) & ps.contains(v)
        vs.append(v[keep])
        ws.append(w[keep])
    n = g.n
    if not vs:
        return np.zeros((0, n), dtype=np.int64), np.zeros((0, n))
    return np.concatenate(vs), np.concatenate(ws)


def count_in_region(ps: PointSet, g: GroupElement, region: Region, cap: int = DEFAULT_CAP) -> int:
    """``#{v in P : g v in region}``."""
    return len(region_hits(ps, g, region, cap)[0])

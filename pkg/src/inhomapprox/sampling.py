"""Random group elements: absolutely continuous laws on SL_n(R), ASL_n(R), and exact Haar on the torus.

Streams come from numpy's Philox4x64 counter-based generator keyed by
``(seed, stream_id)``; any two distinct keys give independent streams, so
parallel workers only need disjoint stream ids.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAX_REDRAWS = 1000
DET_FLOOR = 1e-8


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or stream < 0:
        raise ValidationError("seed and stream id must be non-negative")
    key = np.array([seed % 2**64, stream % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class GroupElement:
    """The affine map ``x -> z + h x`` with ``det h = 1``."""

    h: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or z.shape != (h.shape[0],):
            raise ValidationError("GroupElement needs an n x n matrix and an n-vector")
        if abs(np.linalg.det(h) - 1.0) > 1e-9:
            raise ValidationError(f"det(h) = {np.linalg.det(h)!r} is not 1")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.h.shape[0]

    def apply(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.h.T + self.z

    @property
    def h_inv(self) -> np.ndarray:
        return np.linalg.inv(self.h)

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(np.eye(n), np.zeros(n))


def _unimodular(n: int, rng: np.random.Generator) -> np.ndarray:
    for _ in range(MAX_REDRAWS):
        m = rng.standard_normal((n, n))
        det = np.linalg.det(m)
        if abs(det) >= DET_FLOOR:
            break
    else:
        raise RuntimeError("could not draw a nonsingular Gaussian matrix")
    if det < 0:
        m[[0, 1]] = m[[1, 0]]
    h = m / abs(det) ** (1.0 / n)
    return h


def sample_sl(n: int, seed: int, stream: int = 0) -> GroupElement:
    """Gaussian matrix scaled to determinant one (rows 0 and 1 swapped if det < 0)."""
    if n < 2:
        raise ValidationError("n must be at least 2")
    rng = make_rng(seed, stream)
    return GroupElement(_unimodular(n, rng), np.zeros(n))


def sample_asl(n: int, seed: int, stream: int = 0) -> GroupElement:
    """``sample_sl`` together with an independent uniform translation in ``[0, 1)^n``."""
    if n < 2:
        raise ValidationError("n must be at least 2")
    rng = make_rng(seed, stream)
    h = _unimodular(n, rng)
    return GroupElement(h, rng.random(n))


def sample_torus(n: int, seed: int, stream: int = 0) -> GroupElement:
    """Identity matrix with a uniform translation: Haar measure on R^n / Z^n."""
    if n < 2:
        raise ValidationError("n must be at least 2")
    rng = make_rng(seed, stream)
    return GroupElement(np.eye(n), rng.random(n))


SAMPLERS = {"SLn": sample_sl, "ASLn": sample_asl, "Torus": sample_torus}


def sample_group(group: str, n: int, seed: int, stream: int = 0) -> GroupElement:
    try:
        sampler = SAMPLERS[group]
    except KeyError:
        raise ValidationError(f"unknown group {group!r}; expected one of {sorted(SAMPLERS)}") from None
    return sampler(n, seed, stream)


def uniform_sphere(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)

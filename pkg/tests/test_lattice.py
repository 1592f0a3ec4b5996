import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhomapprox.errors import BudgetExceeded, ValidationError
from inhomapprox.forms import CoordinateProduct, GeneralizedQuadratic, Linear
from inhomapprox.geometry import Region
from inhomapprox.lattice import (PointSet, candidate_blocks, count_in_region, ellipsoid_blocks, enumerate_annulus,
                                 parse_point_set, region_hits, sup_shell)
from inhomapprox.norms import Norm
from inhomapprox.psi import PowerLog, Psi
from inhomapprox.sampling import GroupElement, sample_asl, sample_sl

SUP, EUC, L1 = Norm("sup"), Norm("euclidean"), Norm("l1")
KINDS = [PointSet("nonzero"), PointSet("primitive"), PointSet("congruence", 2), PointSet("congruence", 3),
         PointSet("all")]


def naive(ps, nu, n, S, T):
    """Full-box filter in pure python, independent of the block scan."""
    R = int(math.floor(T * max(1.0 / w for w in nu.weight_vector(n)))) + 1
    out = []
    for v in itertools.product(range(-R, R + 1), repeat=n):
        r = nu(np.array(v, dtype=float))
        if not ((r > S or S == 0) and r <= T):
            continue
        if ps.kind != "all" and not any(v):
            continue
        if ps.kind in ("primitive", "congruence") and math.gcd(*v) != 1:
            continue
        if ps.kind == "congruence" and not (v[0] % ps.q == 1 % ps.q and all(c % ps.q == 0 for c in v[1:])):
            continue
        out.append(v)
    return out


def test_examples():
    assert len(list(enumerate_annulus(PointSet("nonzero"), SUP, 2, 0, 1))) == 8
    assert len(list(enumerate_annulus(PointSet("primitive"), SUP, 2, 0, 2))) == 16
    pts = list(enumerate_annulus(PointSet("congruence", 2), SUP, 2, 0, 2))
    assert sorted(pts) == sorted([(1, 0), (-1, 0), (1, 2), (1, -2), (-1, 2), (-1, -2)])


def test_congruence_one_is_primitive():
    a = list(enumerate_annulus(PointSet("congruence", 1), EUC, 3, 0.5, 4))
    b = list(enumerate_annulus(PointSet("primitive"), EUC, 3, 0.5, 4))
    assert a == b


def test_lexicographic_and_unique():
    pts = list(enumerate_annulus(PointSet("nonzero"), EUC, 3, 1.0, 3.5))
    assert pts == sorted(pts) and len(set(pts)) == len(pts)


@pytest.mark.parametrize("ps", KINDS, ids=lambda p: f"{p.kind}{p.q}")
@pytest.mark.parametrize("nu", [SUP, EUC, L1, Norm("weighted", weights=(1.0, 0.5, 2.0), base=EUC)],
                         ids=["sup", "euc", "l1", "weighted"])
def test_oracle_equivalence(ps, nu):
    n = 3 if nu.kind == "weighted" else 2
    for S, T in [(0.0, 1.0), (0.0, 7.5), (2.0, 6.0), (3.0, 3.0)]:
        assert sorted(enumerate_annulus(ps, nu, n, S, T)) == sorted(naive(ps, nu, n, S, T))


def test_oracle_equivalence_n3_large():
    for ps in KINDS:
        assert sorted(enumerate_annulus(ps, EUC, 3, 5.0, 20.0)) == sorted(naive(ps, EUC, 3, 5.0, 20.0))


@given(S=st.floats(0, 8), d1=st.floats(0, 6), d2=st.floats(0, 6), k=st.sampled_from(KINDS))
@settings(max_examples=60, deadline=None)
def test_disjoint_union(S, d1, d2, k):
    T1, T2 = S + d1, S + d1 + d2
    c = lambda a, b: len(list(enumerate_annulus(k, EUC, 3, a, b)))
    assert c(S, T1) + c(T1, T2) == c(S, T2)


def test_sup_shell():
    for n, m in [(2, 1), (3, 2), (4, 3)]:
        shell = sup_shell(n, m)
        assert len(shell) == (2 * m + 1) ** n - (2 * m - 1) ** n
        assert np.all(np.abs(shell).max(axis=1) == m)
        assert [tuple(r) for r in shell] == sorted(tuple(r) for r in shell)


def test_budget_cap():
    with pytest.raises(BudgetExceeded):
        list(enumerate_annulus(PointSet("nonzero"), SUP, 4, 0, 100, cap=10**6))
    with pytest.raises(ValidationError):
        list(enumerate_annulus(PointSet("nonzero"), SUP, 2, 3, 1))
    with pytest.raises(ValidationError):
        parse_point_set("odd")


def test_region_count_examples():
    ident = GroupElement.identity(2)
    b = Region(CoordinateProduct(2), [0.0], nu=SUP, eps=[0.1], T=1.5)
    assert count_in_region(PointSet("nonzero"), ident, b) == 4
    assert count_in_region(PointSet("nonzero"), ident, b.with_annulus(1.0, 1.0)) == 0
    g = GroupElement(np.diag([2.0, 0.5]), np.zeros(2))
    everything = Region(Linear((1.0, 0.0)), [0.0], nu=SUP, eps=[math.inf], T=1.0)
    v, w = region_hits(PointSet("all"), g, everything)
    # the closed ball also holds w = (0, +-1) from v = (0, +-2)
    assert len(v) == 5
    assert sorted(map(tuple, w)) == [(0.0, -1.0), (0.0, -0.5), (0.0, 0.0), (0.0, 0.5), (0.0, 1.0)]
    open_ball = everything.with_annulus(0.0, 0.99)
    assert count_in_region(PointSet("all"), g, open_ball) == 3


def brute_region(ps, g, region):
    """Brute force over a box that provably covers ``g^{-1}`` of the Euclidean ball."""
    n = g.n
    reach = region.T * math.sqrt(n) * max(1.0 / w for w in region.ball.weight_vector(n)) + np.linalg.norm(g.z)
    R = int(math.ceil(np.linalg.norm(g.h_inv, 2) * reach)) + 1
    axes = [np.arange(-R, R + 1)] * n
    v = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
    w = g.apply(v)
    keep = region.contains(w) & ps.contains(v)
    return {tuple(r) for r in v[keep]}


@pytest.mark.parametrize("seed", range(6))
def test_region_hits_match_brute_force(seed):
    g = sample_asl(2, seed) if seed % 2 else sample_sl(3, seed)
    n = g.n
    form = GeneralizedQuadratic(1, n - 1, 2.0) if n > 2 else CoordinateProduct(2)
    ball = [SUP, EUC, L1][seed % 3]
    region = Region(form, [0.3], nu=ball, psi=Psi((PowerLog(0.5),)), S=1.0, T=9.0 if n == 2 else 6.0)
    for ps in (PointSet("nonzero"), PointSet("primitive"), PointSet("congruence", 2)):
        v, _ = region_hits(ps, g, region)
        assert {tuple(r) for r in v} == brute_region(ps, g, region)


@pytest.mark.parametrize("seed", range(5))
def test_ellipsoid_scan_complete(seed):
    g = sample_asl(3, 40 + seed)
    got = np.concatenate(list(ellipsoid_blocks(g.h, g.z, 5.0)))
    inside = EUC(g.apply(got)) <= 5.0
    R = int(math.ceil(np.linalg.norm(g.h_inv, 2) * (5.0 + np.linalg.norm(g.z)))) + 1
    axes = [np.arange(-R, R + 1)] * 3
    v = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
    want = {tuple(r) for r in v[EUC(g.apply(v)) <= 5.0]}
    assert {tuple(r) for r in got[inside]} == want
    assert [tuple(r) for r in got] == sorted(tuple(r) for r in got)


def test_sign_symmetry():
    region = Region(CoordinateProduct(3), [0.0], nu=EUC, eps=[0.5], T=12.0)
    ident = GroupElement.identity(3)
    for ps in (PointSet("nonzero"), PointSet("primitive")):
        v, _ = region_hits(ps, ident, region)
        for signs in itertools.product([1, -1], repeat=3):
            assert {tuple(r) for r in v * np.array(signs)} == {tuple(r) for r in v}


def test_candidate_blocks_cover_box_for_identity():
    blocks = np.concatenate(list(candidate_blocks(SUP, GroupElement.identity(2), 2.0)))
    assert len(blocks) == 25

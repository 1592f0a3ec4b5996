"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

All stochastic parts use the seed 2024, fixed before any result was seen.
"""
import itertools
import json
import math
import time

import numpy as np
import pytest

from inhomapprox import cli
from inhomapprox.experiments import (ExperimentSetup, counting_ratio_experiment, divergence_growth,
                                     finiteness_experiment, siegel_constant, torus_siegel_mean_test,
                                     uniform_experiment, zeta, zeta_q)
from inhomapprox.forms import CoordinateMax, CoordinateProduct, GeneralizedQuadratic, Linear, VectorForm
from inhomapprox.geometry import (Region, mc_volume, sphere_preimage_ratio, volume_max_closed_form,
                                  volume_product_closed_form)
from inhomapprox.lattice import PointSet, count_in_region, enumerate_annulus
from inhomapprox.norms import Norm
from inhomapprox.psi import Constant, PowerLog, Psi, asymptotic_criterion, uniform_series_criterion
from inhomapprox.sampling import GroupElement, make_rng, sample_asl, sample_sl
from oracles import direct_zeta, integral_is_convergent, series_is_convergent

SEED = 2024
F212 = GeneralizedQuadratic(2, 1, 2.0)
SUP, EUC = Norm("sup"), Norm("euclidean")


def phi(s, eps=0.0, scale=1.0):
    return Psi((PowerLog(s, eps, scale=scale),))


def const(c):
    return Psi((Constant(c),))


def test_criterion_01_torus_siegel(report):
    t0 = time.perf_counter()
    two = torus_siegel_mean_test([0.1, 0.2], [0.6, 0.9], 100_000, SEED)
    rng = make_rng(SEED, 1)
    lo = rng.uniform(-1.0, 1.0, 3)
    hi = lo + rng.uniform(0.2, 1.5, 3)
    three = torus_siegel_mean_test(lo, hi, 100_000, SEED)
    elapsed = time.perf_counter() - t0
    ok = (abs(two.empirical_mean - 0.35) <= 0.005 and abs(three.empirical_mean - three.volume) <= 0.005
          and elapsed < 5)
    assert report(1, ok, f"n=2 mean {two.empirical_mean:.5f} vs 0.35; n=3 mean {three.empirical_mean:.5f} "
                         f"vs {three.volume:.5f}; {elapsed:.2f}s")


def test_criterion_02_siegel_constants(report):
    t0 = time.perf_counter()
    direct, tail_err = direct_zeta(3.0)
    c3 = 1 / zeta(3)
    ok_zeta = abs(c3 - 1 / direct) <= 1e-10 and tail_err < 1e-10
    z2 = zeta_q(3, 2)
    ok_zq = abs(z2 - 7 / 8 * direct) <= 1e-10
    c = siegel_constant(PointSet("congruence", 2), 3, "SLn")
    ok_c = c == pytest.approx(1 / (2**3 * z2), rel=1e-15)
    elapsed = time.perf_counter() - t0
    ok = ok_zeta and ok_zq and ok_c and elapsed < 1
    assert report(2, ok, f"|1/zeta(3) - direct| = {abs(c3 - 1 / direct):.1e}; "
                         f"|zeta_2(3) - 7/8 direct| = {abs(z2 - 7 / 8 * direct):.1e}; c = {c:.12f}; "
                         f"{elapsed:.2f}s")


def test_criterion_03_product_volume(report):
    t0 = time.perf_counter()
    closed = volume_product_closed_form(2, const(0.1), 10, 100)
    exact = 8 * 0.1 * math.log(10)
    mc2 = mc_volume(Region(CoordinateProduct(2), [0.0], nu=SUP, psi=const(0.1), S=10, T=100), 10**7, SEED)
    closed3 = volume_product_closed_form(3, const(0.05), 10, 20)
    mc3 = mc_volume(Region(CoordinateProduct(3), [0.0], nu=SUP, psi=const(0.05), S=10, T=20), 10**7, SEED)
    elapsed = time.perf_counter() - t0
    e2, e3 = abs(mc2.value / closed - 1), abs(mc3.value / closed3 - 1)
    ok = abs(closed - exact) <= 1e-6 and e2 <= 0.02 and e3 <= 0.02 and elapsed < 30
    assert report(3, ok, f"closed {closed:.9f} vs 8*0.1*ln10 {exact:.9f}; MC rel err n=2 {e2:.2e}, "
                         f"n=3 {e3:.2e}; {elapsed:.1f}s")


def test_criterion_04_max_volume(report):
    t0 = time.perf_counter()
    slab = volume_max_closed_form(2, 1, (1.0,), const(0.05), 1, 10)
    band = volume_max_closed_form(3, 2, (1.0, 1.0), const(0.1), 2, 4)
    # elementary geometry: slab |x1| <= 0.05 over 1 <= |x2| <= 10, band 0.2 * 0.2 * (2 * 2)
    slab_oracle = (2 * 0.05) * (2 * (10 - 1))
    band_oracle = 0.2 * 0.2 * (2 * (4 - 2))
    elapsed = time.perf_counter() - t0
    ok = abs(slab - slab_oracle) <= 1e-9 and abs(band - band_oracle) <= 1e-9 and elapsed < 1
    assert report(4, ok, f"slab {slab!r} vs {slab_oracle!r}; band {band!r} vs {band_oracle!r}; {elapsed:.3f}s")


def _naive_points(ps, nu, n, S, T):
    R = int(math.floor(T)) + 1
    axes = [np.arange(-R, R + 1)] * n
    v = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
    r = nu(v.astype(float))
    v = v[((r > S) | (S == 0)) & (r <= T)]
    out = []
    for row in map(tuple, v.tolist()):
        if ps.kind != "all" and not any(row):
            continue
        if ps.kind in ("primitive", "congruence") and math.gcd(*row) != 1:
            continue
        if ps.kind == "congruence" and not (row[0] % ps.q == 1 % ps.q and all(c % ps.q == 0 for c in row[1:])):
            continue
        out.append(row)
    return sorted(out)


def test_criterion_05_enumeration_oracle(report):
    t0 = time.perf_counter()
    kinds = [PointSet("nonzero"), PointSet("primitive"), PointSet("congruence", 1), PointSet("congruence", 2),
             PointSet("congruence", 5), PointSet("all")]
    cases = 0
    mismatches = []
    for ps, nu, n, (S, T) in itertools.product(kinds, [SUP, EUC], [2, 3], [(0.0, 20.0), (4.5, 13.0), (7.0, 7.0)]):
        got = list(enumerate_annulus(ps, nu, n, S, T))
        if got != _naive_points(ps, nu, n, S, T):
            mismatches.append((ps, nu.kind, n, S, T))
        cases += 1
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 60
    assert report(5, ok, f"{cases} cases, {len(mismatches)} mismatches; {elapsed:.1f}s")


TRUTH_TABLE = [
    # (form, psi, xi_zero) with asymptotic exponents at least 0.25 away from any boundary
    (F212, phi(0.5), False),
    (F212, phi(1.0), False),  # phi_{n-d,0}: critical, divergent
    (F212, phi(1.0, -1.5), False),
    (F212, phi(1.0, -0.5), False),
    (F212, phi(1.5), False),
    (F212, phi(0.25), True),
    (GeneralizedQuadratic(2, 2, 2.0), phi(2.0), True),
    (GeneralizedQuadratic(2, 2, 2.0), phi(1.5), False),
    (GeneralizedQuadratic(2, 2, 3.0), phi(1.0), False),
    (GeneralizedQuadratic(2, 2, 3.0), phi(0.75), False),
    (VectorForm((F212, Linear((0.0, 1.0, 1.0)))), Psi((PowerLog(0.25), PowerLog(0.75, -2.0))), False),
    (CoordinateProduct(3, 2.0), phi(1.0), True),
    (CoordinateProduct(3, 2.0), phi(1.0), False),
    (CoordinateProduct(2), phi(1.0, -1.5), False),
    (CoordinateProduct(2), phi(0.5), True),
    (CoordinateMax(3, 2, (1.0, 2.0)), phi(1.0), True),
    (CoordinateMax(3, 2, (1.0, 2.0)), phi(0.8), False),
    (CoordinateMax(3, 2, (1.0, 2.0)), phi(1.0, -1.5), False),
    (CoordinateMax(3, 1, (0.5,)), phi(2.0, -1.5), False),
    (CoordinateMax(3, 1, (0.5,)), phi(0.25), True),
]


def _series_applicable(form):
    return isinstance(form, (CoordinateProduct, CoordinateMax)) or form.total_degree < form.n


def test_criterion_06_truth_table(report):
    t0 = time.perf_counter()
    bad = []
    for idx, (form, psi, xi_zero) in enumerate(TRUTH_TABLE):
        xi = [0.0] * form.ell if xi_zero else [0.5] * form.ell
        if asymptotic_criterion(form, psi, xi).convergent != integral_is_convergent(form, psi, xi_zero):
            bad.append(("asymptotic", idx))
        if _series_applicable(form):
            if uniform_series_criterion(form, psi, xi, 2.0).convergent != series_is_convergent(form, psi, xi_zero):
                bad.append(("uniform", idx))
    # critical-exponent facts for n = 3, d = 2
    facts = [
        asymptotic_criterion(F212, phi(1.0), [0.5]).value.value == "Divergent",
        uniform_series_criterion(F212, phi(1.0), [0.5], 2.0).value.value == "Divergent",
        all(uniform_series_criterion(F212, phi(s), [0.5], 2.0).value.value == "Convergent"
            for s in (0.1, 0.5, 0.9)),
    ]
    elapsed = time.perf_counter() - t0
    ok = not bad and all(facts) and elapsed < 5
    assert report(6, ok, f"{len(TRUTH_TABLE)} combinations, mismatches {bad}; critical facts {facts}; "
                         f"{elapsed:.2f}s")


DIV_SETUP = ExperimentSetup(F212, [0.5], phi(0.5), EUC, PointSet("nonzero"), "SLn")
CONV_SETUP = ExperimentSetup(F212, [0.5], phi(1.5), EUC, PointSet("nonzero"), "SLn")


@pytest.mark.slow
def test_criterion_07_counting_asymptotics(report):
    t0 = time.perf_counter()
    recs = counting_ratio_experiment(DIV_SETUP, [40, 80, 160], 4, SEED, threads=4)
    elapsed = time.perf_counter() - t0
    by_t = {t: [r.ratio for r in recs if r.T == t] for t in (40.0, 80.0, 160.0)}
    med160 = float(np.median(by_t[160.0]))
    dev40 = float(np.median(np.abs(np.array(by_t[40.0]) - 1)))
    dev160 = float(np.median(np.abs(np.array(by_t[160.0]) - 1)))
    band_ok, improves = 0.75 <= med160 <= 1.30, dev160 < dev40
    ok = band_ok and improves and elapsed < 600
    ratios = "; ".join(f"T={int(t)}: " + ", ".join(f"{x:.3f}" for x in v) for t, v in by_t.items())
    assert report(7, ok, f"median ratio at 160 = {med160:.3f} (band {'ok' if band_ok else 'missed'}); "
                         f"median |r-1| 40 -> 160: {dev40:.3f} -> {dev160:.3f} "
                         f"({'improves' if improves else 'does not improve'}); {ratios}; {elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_08_dichotomy(report):
    t0 = time.perf_counter()
    conv = finiteness_experiment(CONV_SETUP, 300.0, 4, SEED, threads=4)
    div = divergence_growth(DIV_SETUP, 300.0, 4, SEED, threads=4)
    elapsed = time.perf_counter() - t0
    stabilized = sum(r.stabilized for r in conv)
    growing = sum(r.count_full > r.count_half for r in div)
    ok = stabilized >= 3 and growing == 4 and elapsed < 600
    assert report(8, ok, f"convergent: {stabilized}/4 stabilized "
                         f"{[(r.count_half, r.count_full) for r in conv]}; divergent: {growing}/4 growing "
                         f"{[(r.count_half, r.count_full) for r in div]}; {elapsed:.0f}s")


def test_criterion_09_uniform(report):
    t0 = time.perf_counter()
    recs = uniform_experiment(DIV_SETUP, range(4, 12), 4, SEED, threads=4)
    elapsed = time.perf_counter() - t0
    empty = [(r.g_id, r.k) for r in recs if not r.nonempty]
    ok = all(r.nonempty for r in recs if r.k >= 6) and elapsed < 300
    assert report(9, ok, f"empty (g, k) pairs {empty}; {elapsed:.2f}s")


def test_criterion_10_sphere_preimage(report):
    t0 = time.perf_counter()
    vals = [sphere_preimage_ratio(F212, [e], 1 << 23, SEED) for e in (1e-1, 1e-2, 1e-3)]
    elapsed = time.perf_counter() - t0
    spread = max(vals) / min(vals)
    ok = spread <= 4.0 and elapsed < 60
    assert report(10, ok, f"ratios {[round(v, 4) for v in vals]}, spread {spread:.3f}; {elapsed:.1f}s")


def _invariants(tmp_path, capsys, monkeypatch):
    rng = make_rng(SEED, 2)
    results = {}
    forms = [F212, GeneralizedQuadratic(1, 2, 3.0), CoordinateProduct(3, 2.0, signed=True), Linear((1.0, -2.0, 0.5))]
    x = rng.normal(size=(200, 3))
    t = rng.uniform(0.1, 10.0, size=200)
    results["homogeneity"] = all(
        np.allclose(f.evaluate(t[:, None] * x), t[:, None] ** f.degrees[0] * f.evaluate(x), rtol=1e-9, atol=1e-9)
        for f in forms)
    euler, fd = True, True
    for f in forms:
        for row in x[:40]:
            g = f.gradient(row)
            euler &= bool(np.allclose(g @ row, f.degrees[0] * f.evaluate(row), rtol=1e-9, atol=1e-9))
            h = 1e-6
            num = np.array([(f.evaluate(row + h * e) - f.evaluate(row - h * e)) / (2 * h) for e in np.eye(3)]).T
            fd &= bool(np.allclose(g, num, rtol=1e-5, atol=1e-6))
    results["euler"], results["finite_difference"] = euler, fd
    mono, chain, shift = True, True, True
    for k in range(4):
        g = sample_sl(3, SEED, k)
        counts = [count_in_region(PointSet("nonzero"), g, Region(F212, [0.5], psi=phi(0.5, scale=s), T=15.0))
                  for s in (0.01, 0.1, 1.0, 3.0)]
        mono &= counts == sorted(counts)
        region = Region(F212, [0.5], psi=phi(0.5), T=15.0)
        c = [count_in_region(PointSet(kind, q), g, region)
             for kind, q in [("congruence", 3), ("primitive", 1), ("nonzero", 1)]]
        chain &= c[0] <= c[1] <= c[2]
        a = sample_asl(3, SEED, k)
        moved = GroupElement(a.h, a.z + a.h @ rng.integers(-5, 6, size=3).astype(float))
        shift &= count_in_region(PointSet("all"), a, region) == count_in_region(PointSet("all"), moved, region)
    results["psi_scaling_monotone"], results["congruence_chain"], results["asl_shift"] = mono, chain, shift
    cfg = tmp_path / "count.json"
    cfg.write_text(json.dumps({"n": 3, "form": {"kind": "generalized_quadratic", "p": 2, "q": 1, "beta": 2},
                               "xi": [0.5], "psi": {"kind": "power_log", "s": 0.5, "eps": 0},
                               "T_schedule": [8, 16], "g_samples": 4, "mc_samples": 1 << 14, "seed": SEED}))
    blobs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("THREADS", threads)
        out = tmp_path / f"run{threads}.csv"
        cli.main(["count", "--config", str(cfg), "--out", str(out)])
        capsys.readouterr()
        blobs.append(out.read_bytes() + (tmp_path / f"run{threads}.csv.json").read_bytes())
    results["byte_identical"] = blobs[0] == blobs[1]
    return results


def test_criterion_11_invariants(report, tmp_path, capsys, monkeypatch):
    results = _invariants(tmp_path, capsys, monkeypatch)
    failed = [k for k, v in results.items() if not v]
    assert report(11, not failed, f"{len(results)} suites, failed {failed}")

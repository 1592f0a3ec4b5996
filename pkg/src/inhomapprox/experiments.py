"""Numerical experiments: Siegel constants and the torus mean identity, counting
asymptotics for generic lattices, finiteness in the convergent regime, and
uniform approximability along dyadic radii.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from .errors import BudgetExceeded, CriterionMismatch, UncertifiedPair, ValidationError
from .forms import Form, Pullback
from .geometry import Region, mc_volume
from .lattice import DEFAULT_CAP, PointSet, region_hits, sup_shell
from .norms import Norm
from .psi import Psi, Verdict, asymptotic_criterion, regularity_certificate, uniform_series_criterion
from .sampling import GroupElement, make_rng, sample_group

EUCLIDEAN = Norm("euclidean")


# -- Siegel constants ----------------------------------------------------------


def zeta(s: float) -> float:
    if not s > 1:
        raise ValidationError("zeta is evaluated only for s > 1")
    return float(special.zeta(s))


def prime_divisors(q: int) -> list[int]:
    out, d = [], 2
    while d * d <= q:
        if q % d == 0:
            out.append(d)
            while q % d == 0:
                q //= d
        d += 1
    if q > 1:
        out.append(q)
    return out


def zeta_q(s: float, q: int) -> float:
    """Zeta restricted to integers coprime to ``q``."""
    return zeta(s) * math.prod(1.0 - p ** (-s) for p in prime_divisors(q))


def siegel_constant(ps: PointSet, n: int, group: str) -> float:
    """The mean-value constant ``c`` of the ``P``-Siegel transform for certified pairs."""
    if n < 2:
        raise ValidationError("n must be at least 2")
    if group in ("ASLn", "Torus") and ps.kind == "all":
        return 1.0
    if group == "SLn":
        if ps.kind == "nonzero":
            return 1.0
        if ps.kind == "primitive" or (ps.kind == "congruence" and ps.q == 1):
            return 1.0 / zeta(n)
        if ps.kind == "congruence" and n >= 3:
            return 1.0 / (ps.q**n * zeta_q(n, ps.q))
    raise UncertifiedPair(f"no certified Siegel constant for group {group} with point set {ps.to_config()} in n={n}")


@dataclass(frozen=True)
class TorusMeanResult:
    empirical_mean: float
    volume: float
    stderr: float
    z_score: float


def torus_lattice_counts(lo, hi, z) -> np.ndarray:
    """``#((z + Z^n) cap prod [lo_i, hi_i])`` for each row of ``z``."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    per_axis = np.floor(hi - z) - np.ceil(lo - z) + 1
    return np.prod(np.maximum(per_axis, 0), axis=-1)


def torus_siegel_mean_test(lo, hi, samples: int, seed: int = 0) -> TorusMeanResult:
    """Average of the Siegel transform of a box over uniform torus translates."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValidationError("box corners must be vectors of the same length")
    if samples <= 0:
        raise ValidationError("samples must be positive")
    volume = float(np.prod(np.maximum(hi - lo, 0.0)))
    z = make_rng(seed).random((samples, len(lo)))
    counts = torus_lattice_counts(lo, hi, z) if np.all(hi >= lo) else np.zeros(samples)
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    z_score = (mean - volume) / stderr if stderr > 0 else (0.0 if mean == volume else math.inf)
    return TorusMeanResult(mean, volume, stderr, z_score)


# -- shared plumbing ------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSetup:
    """The data every lattice experiment shares."""

    form: Form
    xi: np.ndarray
    psi: Psi
    nu: Norm = field(default_factory=Norm)
    ps: PointSet = field(default_factory=PointSet)
    group: str = "SLn"

    def __post_init__(self):
        object.__setattr__(self, "xi", np.atleast_1d(np.asarray(self.xi, dtype=float)))

    @property
    def n(self) -> int:
        return self.form.n

    def sample(self, seed: int, g_id: int) -> GroupElement:
        return sample_group(self.group, self.n, seed, g_id)


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _require(verdict: Verdict, wanted: Verdict, what: str):
    if verdict is not wanted:
        raise CriterionMismatch(f"{what} needs a {wanted.value} criterion, got {verdict.value}")


# -- counting asymptotics -------------------------------------------------------------


@dataclass(frozen=True)
class CountRecord:
    g_id: int
    seed: int
    T: float
    count: int
    predicted: float
    ratio: float | None

    @property
    def defined(self) -> bool:
        return self.ratio is not None

    def row(self) -> dict:
        return asdict(self)


def counting_ratio_experiment(setup: ExperimentSetup, T_schedule, g_samples: int, seed: int,
                              mc_samples: int = 1 << 22, cap: int = DEFAULT_CAP,
                              threads: int = 1) -> list[CountRecord]:
    """Lattice counts in the divergent regime against ``c * volume``.

    For each sampled ``g`` and each ``t``: the number of ``w in g P`` with
    ``|f(w) - xi| <= psi(nu(w))`` and ``|w|_2 <= t``, next to ``c`` times the
    Monte Carlo volume of the same region.
    """
    schedule = sorted(float(t) for t in T_schedule)
    if not schedule or schedule[0] <= 0:
        raise ValidationError("T_schedule needs positive radii")
    _require(asymptotic_criterion(setup.form, setup.psi, setup.xi).value, Verdict.DIVERGENT, "counting")
    c = siegel_constant(setup.ps, setup.n, setup.group)
    region = Region(setup.form, setup.xi, setup.nu, psi=setup.psi, T=schedule[-1], ball=EUCLIDEAN)
    predicted = [c * mc_volume(region.with_annulus(0.0, t), mc_samples, seed).value for t in schedule]

    def run(g_id: int) -> list[CountRecord]:
        g = setup.sample(seed, g_id)
        _, w = region_hits(setup.ps, g, region, cap)
        radii = np.sort(np.linalg.norm(w, axis=1))
        rows = []
        for t, pred in zip(schedule, predicted):
            count = int(np.searchsorted(radii, t, side="right"))
            rows.append(CountRecord(g_id, seed, t, count, pred, count / pred if pred > 0 else None))
        return rows

    return [rec for rows in _map_ordered(run, range(g_samples), threads) for rec in rows]


# -- finiteness -----------------------------------------------------------------


@dataclass(frozen=True)
class FinitenessRecord:
    g_id: int
    seed: int
    count_half: int
    count_full: int

    @property
    def stabilized(self) -> bool:
        return self.count_half == self.count_full


def solution_norms(setup: ExperimentSetup, g: GroupElement, T: float, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``nu(v)`` for every ``v in P`` with ``nu(v) <= T`` and ``|f(g v) - xi| <= psi(nu(v))``, sorted."""
    pulled = Pullback(setup.form, g.h, g.z)
    region = Region(pulled, setup.xi, setup.nu, psi=setup.psi, T=T)
    v, _ = region_hits(setup.ps, GroupElement.identity(setup.n), region, cap)
    return np.sort(np.asarray(setup.nu(v), dtype=float)) if len(v) else np.zeros(0)


def finiteness_experiment(setup: ExperimentSetup, T_max: float, g_samples: int, seed: int,
                          cap: int = DEFAULT_CAP, threads: int = 1) -> list[FinitenessRecord]:
    """Counts at ``T_max / 2`` and ``T_max`` in the convergent regime; equal counts signal finiteness."""
    _require(asymptotic_criterion(setup.form, setup.psi, setup.xi).value, Verdict.CONVERGENT, "finiteness")
    return _finiteness(setup, T_max, g_samples, seed, cap, threads)


def _finiteness(setup, T_max, g_samples, seed, cap, threads):
    def run(g_id: int) -> FinitenessRecord:
        norms = solution_norms(setup, setup.sample(seed, g_id), T_max, cap)
        half = int(np.searchsorted(norms, T_max / 2, side="right"))
        return FinitenessRecord(g_id, seed, half, len(norms))

    return _map_ordered(run, range(g_samples), threads)


def divergence_growth(setup: ExperimentSetup, T_max: float, g_samples: int, seed: int,
                      cap: int = DEFAULT_CAP, threads: int = 1) -> list[FinitenessRecord]:
    """The same two counts in the divergent regime, where they should keep growing."""
    _require(asymptotic_criterion(setup.form, setup.psi, setup.xi).value, Verdict.DIVERGENT, "divergence growth")
    return _finiteness(setup, T_max, g_samples, seed, cap, threads)


# -- uniform approximability --------------------------------------------------------


@dataclass(frozen=True)
class UniformRecord:
    g_id: int
    seed: int
    k: int
    nonempty: bool
    witness: tuple[int, ...] | None


def find_witness(setup: ExperimentSetup, g: GroupElement, T: float, bound,
                 cap: int = DEFAULT_CAP) -> np.ndarray | None:
    """First ``v in P`` (sup shells outward, lexicographic within a shell) with
    ``nu(v) <= T`` and ``|f(g v) - xi| <= bound``; None if there is none."""
    bound = np.broadcast_to(np.asarray(bound, dtype=float), (setup.form.ell,))
    m_max = int(math.floor(T * float(setup.nu.coordinate_bounds(setup.n).max()) + 1e-9))
    scanned = 0
    for m in range(0 if setup.ps.kind == "all" else 1, m_max + 1):
        shell = sup_shell(setup.n, m)
        scanned += len(shell)
        if scanned > cap:
            raise BudgetExceeded(f"witness search scanned more than {cap} points")
        dev = np.abs(setup.form.evaluate(g.apply(shell)) - setup.xi)
        ok = np.all(dev <= bound, axis=-1)
        if not ok.any():
            continue
        cand = shell[ok]
        cand = cand[(np.asarray(setup.nu(cand)) <= T) & setup.ps.contains(cand)]
        if len(cand):
            return cand[0]
    return None


def uniform_experiment(setup: ExperimentSetup, k_range, g_samples: int, seed: int,
                       cap: int = DEFAULT_CAP, threads: int = 1) -> list[UniformRecord]:
    """Nonemptiness of ``B(psi(2^k), 2^k) cap P`` for each dyadic ``k``."""
    _require(uniform_series_criterion(setup.form, setup.psi, setup.xi).value, Verdict.CONVERGENT, "uniform")
    ks = list(k_range)

    def run(g_id: int) -> list[UniformRecord]:
        g = setup.sample(seed, g_id)
        rows = []
        for k in ks:
            T = 2.0**k
            v = find_witness(setup, g, T, setup.psi(T), cap)
            rows.append(UniformRecord(g_id, seed, k, v is not None, None if v is None else tuple(int(c) for c in v)))
        return rows

    return [rec for rows in _map_ordered(run, range(g_samples), threads) for rec in rows]


def bridge_constant(psi: Psi, a: float = 2.0) -> float:
    """``b' = b^{-j}`` with ``b`` the regularity certificate of ``psi`` at ``a`` and ``a^j >= 2``.

    Then ``psi(2^k) <= b' psi(T)`` for every ``T`` in ``[2^k, 2^{k+1}]``.
    """
    if not 1 < a <= 2:
        raise ValidationError("the bridge needs 1 < a <= 2")
    b = regularity_certificate(psi, a)
    if b is None:
        raise ValidationError("psi has no regularity certificate at this a")
    j = math.ceil(math.log(2.0) / math.log(a) - 1e-12)
    return b ** (-j)


def check_dyadic_bridge(setup: ExperimentSetup, g: GroupElement, witness, k: int,
                        a: float = 2.0, grid: int = 257) -> bool:
    """A witness for ``B(psi(2^k), 2^k)`` also witnesses ``B(b' psi(T), T)`` on ``[2^k, 2^{k+1}]``.

    Checks the hypothesis on the witness and the conclusion on a grid of T.
    """
    v = np.asarray(witness, dtype=float)
    T0 = 2.0**k
    dev = np.abs(setup.form.evaluate(g.apply(v)) - setup.xi)
    if float(setup.nu(v)) > T0 or np.any(dev > setup.psi(T0)):
        raise ValidationError("the witness does not lie in B(psi(2^k), 2^k)")
    b_prime = bridge_constant(setup.psi, a)
    Ts = np.linspace(T0, 2 * T0, grid)
    return bool(np.all(dev <= b_prime * setup.psi(Ts) * (1 + 1e-12)) and float(setup.nu(v)) <= Ts.min())

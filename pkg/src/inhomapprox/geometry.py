"""Regions ``A`` and ``B``, their volumes (closed form, asymptotic model, Monte Carlo), and sphere preimages."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from .errors import DimensionMismatch, InvalidDegrees, ThresholdViolation, ValidationError
from .forms import CoordinateMax, CoordinateProduct, Form, GeneralizedQuadratic, Linear, VectorForm
from .norms import Norm, upper_constant
from .psi import Constant, Psi


@dataclass(frozen=True, eq=False)
class Region:
    """``{x : |f(x) - xi| <= bound}`` intersected with ``{S < ball(x) <= T}``.

    ``bound`` is ``psi(nu(x))`` for an A-type region (``psi`` given) and the
    fixed vector ``eps`` for a B-type region.  ``ball`` defaults to ``nu``.
    When ``S == 0`` the origin belongs to the annulus, matching the closed
    ball ``nu(x) <= T`` of a B-set.
    """

    form: Form
    xi: np.ndarray
    nu: Norm = field(default_factory=Norm)
    psi: Psi | None = None
    eps: np.ndarray | None = None
    S: float = 0.0
    T: float = math.inf
    ball: Norm | None = None

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if xi.shape != (self.form.ell,):
            raise DimensionMismatch(f"shift has {xi.size} entries, form has ell={self.form.ell}")
        object.__setattr__(self, "xi", xi)
        if (self.psi is None) == (self.eps is None):
            raise ValidationError("a region needs exactly one of psi (A-type) or eps (B-type)")
        if self.psi is not None and self.psi.ell != self.form.ell:
            raise ValidationError(f"psi has {self.psi.ell} components, form has ell={self.form.ell}")
        if self.eps is not None:
            eps = np.atleast_1d(np.asarray(self.eps, dtype=float))
            if eps.shape != (self.form.ell,) or np.any(eps <= 0):
                raise ValidationError("eps must hold ell positive entries")
            object.__setattr__(self, "eps", eps)
        if not 0 <= self.S <= self.T:
            raise ValidationError(f"annulus needs 0 <= S <= T, got S={self.S}, T={self.T}")
        if self.ball is None:
            object.__setattr__(self, "ball", self.nu)

    @property
    def kind(self) -> str:
        return "A" if self.psi is not None else "B"

    @property
    def bound_sup(self) -> np.ndarray:
        return self.psi.sup if self.psi is not None else self.eps

    def bound(self, x) -> np.ndarray:
        if self.psi is not None:
            return self.psi(self.nu(x))
        return np.broadcast_to(self.eps, np.shape(x)[:-1] + (self.form.ell,))

    def satisfies(self, x) -> np.ndarray:
        """The approximation condition alone, without the annulus."""
        dev = np.abs(self.form.evaluate(x) - self.xi)
        ok = np.all(dev <= self.bound_sup, axis=-1)
        if self.psi is not None and np.any(ok):
            x = np.asarray(x, dtype=float)
            sub = np.all(dev[ok] <= self.bound(x[ok]), axis=-1)
            ok = ok.copy()
            ok[ok] = sub
        return ok

    def in_annulus(self, x) -> np.ndarray:
        r = np.asarray(self.ball(x))
        return ((r > self.S) | (self.S == 0)) & (r <= self.T)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.in_annulus(x) & self.satisfies(x)

    def with_annulus(self, S: float, T: float) -> "Region":
        return Region(self.form, self.xi, self.nu, self.psi, self.eps, S, T, self.ball)

    def scaled(self, c: float) -> "Region":
        """Same region with the bound multiplied by ``c``."""
        if self.psi is not None:
            return Region(self.form, self.xi, self.nu, self.psi.scaled(c), None, self.S, self.T, self.ball)
        return Region(self.form, self.xi, self.nu, None, self.eps * c, self.S, self.T, self.ball)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float = 0.0
    method: str = "ClosedForm"
    samples: int = 0

    def __post_init__(self):
        if self.method not in ("ClosedForm", "MonteCarlo", "NumericQuadrature"):
            raise ValidationError(f"unknown volume method {self.method!r}")
        if self.method == "ClosedForm" and self.stderr != 0:
            raise ValidationError("closed-form volumes carry no standard error")

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "method": self.method, "samples": self.samples}


# -- closed forms on the sup-norm annulus -------------------------------------


def _scalar_psi(psi: Psi) -> Psi:
    if psi.ell != 1:
        raise DimensionMismatch("closed-form volumes need a scalar psi")
    return psi


def _quad(fn, S: float, T: float) -> float:
    if T <= S:
        return 0.0
    # split at decades so that the adaptive rule sees smooth pieces
    edges = np.unique(np.concatenate([[S, T], np.geomspace(S, T, max(2, int(np.log10(T / S)) + 2))]))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(fn, a, b, epsabs=0.0, epsrel=1e-10, limit=200)
        total += val
    return total


def product_threshold(psi: Psi, n: int) -> float:
    return 1.0 + float(_scalar_psi(psi).sup[0]) ** (1.0 / n)


def volume_product_closed_form(n: int, psi: Psi, S: float, T: float) -> float:
    """Lebesgue measure of ``{prod |x_i| <= psi(|x|_inf), S <= |x|_inf <= T}``.

    ``2^n n int_S^T psi(t)/t sum_{i<=n-2} log^i(t^n / psi(t)) / i! dt``, valid
    once ``S`` exceeds ``1 + sup psi^{1/n}``.
    """
    if n < 2:
        raise ValidationError("n must be at least 2")
    R = product_threshold(psi, n)
    if S < R:
        raise ThresholdViolation(f"S={S} is below the admissible threshold {R:.6g}")
    if T < S:
        raise ValidationError("need S <= T")
    comp = psi.components[0]

    def integrand(t):
        p = float(comp(t))
        L = math.log(t**n / p)
        return p / t * sum(L**i / math.factorial(i) for i in range(n - 1))

    return 2.0**n * n * _quad(integrand, S, T)


def max_threshold(psi: Psi, z) -> float:
    """``max_i sup psi^{1/z_i}``: beyond it the slab never reaches the sup-norm faces."""
    sup = float(_scalar_psi(psi).sup[0])
    return max(sup ** (1.0 / zi) for zi in z)


def volume_max_closed_form(n: int, p: int, z, psi: Psi, S: float, T: float) -> float:
    """Measure of ``{max_{i<=p} |x_i|^{z_i} <= psi(|x|_inf), S <= |x|_inf <= T}``.

    ``2^n (n-p) int_S^T psi(t)^zeta t^{n-p-1} dt`` with ``zeta = sum 1/z_i``,
    exact in closed form for constant psi.
    """
    z = tuple(float(v) for v in z)
    if not 1 <= p <= n - 1 or len(z) != p:
        raise ValidationError("need 1 <= p <= n-1 and p exponents")
    R = max_threshold(psi, z)
    if S < R:
        raise ThresholdViolation(f"S={S} is below the admissible threshold {R:.6g}")
    if T < S:
        raise ValidationError("need S <= T")
    zeta = sum(1.0 / v for v in z)
    comp = psi.components[0]
    k = n - p
    if isinstance(comp, Constant):
        return 2.0**n * comp.c**zeta * (T**k - S**k)
    return 2.0**n * k * _quad(lambda t: float(comp(t)) ** zeta * t ** (k - 1), S, T)


# -- Monte Carlo ---------------------------------------------------------------

MC_REPLICATES = 8
MC_CHUNK = 1 << 16
RADIAL_GRID = 96
BISECTION_STEPS = 48


def sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _qmc_directions(n: int, count: int, seed: int, replicate: int) -> np.ndarray:
    engine = qmc.Sobol(d=n, scramble=True, seed=np.random.default_rng([seed, replicate]))
    m = max(1, math.ceil(math.log2(max(count, 2))))
    pts = engine.random_base2(m)[:count]
    g = special.ndtri(np.clip(pts, 1e-16, 1 - 1e-16))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _interval_moment(lo, hi, n):
    lo = np.maximum(lo, 0.0)
    return np.where(hi > lo, (hi**n - lo**n) / n, 0.0)


def _radial_constant(region: Region, u: np.ndarray, r0: np.ndarray, r1: np.ndarray) -> np.ndarray:
    n = region.form.n
    c = region.bound_sup
    if np.all(np.isinf(c)):
        return _interval_moment(r0, r1, n)
    start, end = region.form.ray_interval(u, region.xi - c, region.xi + c)
    return _interval_moment(np.maximum(start, r0), np.minimum(end, r1), n)


def _radial_scan(member, r0: np.ndarray, r1: np.ndarray, extra: list[np.ndarray], n: int) -> np.ndarray:
    """``int_{r0}^{r1} r^{n-1} member(r) dr`` row by row, by grid scan and bisection.

    ``member`` maps an ``(m, k)`` array of radii to booleans for the ``m`` rows.
    ``extra`` holds per-row radii that must be on the grid (thin features).
    """
    inner = np.where(r0 > 0, r0, r1 * 1e-6)
    s = np.linspace(0.0, 1.0, RADIAL_GRID)
    grid = inner[:, None] * (r1 / inner)[:, None] ** s[None, :]
    pts = [r0[:, None]] + [np.where(np.isfinite(p) & (p > r0) & (p < r1), p, r1)[:, None] for p in extra]
    grid = np.sort(np.concatenate([grid] + pts, axis=1), axis=1)
    inside = member(grid)
    lo, hi = grid[:, :-1], grid[:, 1:]
    a_in, b_in = inside[:, :-1], inside[:, 1:]
    total = np.where(a_in & b_in, (hi**n - lo**n) / n, 0.0).sum(axis=1)
    rows, cols = np.nonzero(a_in != b_in)
    if len(rows):
        left, right = lo[rows, cols].copy(), hi[rows, cols].copy()
        left_in = a_in[rows, cols]
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (left + right)
            same = member_rows(member, rows, mid) == left_in
            left = np.where(same, mid, left)
            right = np.where(same, right, mid)
        t = 0.5 * (left + right)
        a0, b0 = lo[rows, cols], hi[rows, cols]
        part = np.where(left_in, (t**n - a0**n) / n, (b0**n - t**n) / n)
        np.add.at(total, rows, part)
    return total


def member_rows(member, rows: np.ndarray, r: np.ndarray) -> np.ndarray:
    return member(r[:, None], rows)[:, 0]


def _radial_general(region: Region, u: np.ndarray, r0: np.ndarray, r1: np.ndarray) -> np.ndarray:
    """``int r^{n-1} 1[r u in region] dr`` on ``(r0, r1]``."""
    n = region.form.n
    extra = []
    try:
        # where f - xi vanishes along the ray, thin regions live
        extra = list(region.form.ray_interval(u, region.xi, region.xi))
    except (NotImplementedError, AttributeError):
        pass

    def member(r, rows=None):
        uu = u if rows is None else u[rows]
        x = r[..., None] * uu[:, None, :]
        return region.satisfies(x.reshape(-1, n)).reshape(r.shape)

    return _radial_scan(member, r0, r1, extra, n)


def _psi_is_constant(region: Region) -> bool:
    return region.psi is None or region.psi.is_constant


def _radial_moments(region: Region, u: np.ndarray) -> np.ndarray:
    b = np.asarray(region.ball(u))
    r0, r1 = region.S / b, region.T / b
    if _psi_is_constant(region):
        try:
            return _radial_constant(region, u, r0, r1)
        except (NotImplementedError, AttributeError):
            pass
    return _radial_general(region, u, r0, r1)


PROFILE_WINDOW = 0.05
PROFILE_GRID = 3000
PROFILE_MIXED_GRID = 800  # mixed path integrates one profile per representative
PROFILE_REPRESENTATIVES = 32


def _profile_applicable(region: Region) -> bool:
    # needs a smooth density of f(u) at 0, i.e. a regular zero set
    return isinstance(region.form, (GeneralizedQuadratic, Linear))


def _euclidean_profile(region: Region) -> bool:
    return region.nu.kind == "euclidean" and region.ball.kind == "euclidean"


def radial_profile(region: Region, a, b=1.0, c=1.0) -> np.ndarray:
    """``g(a, b, c) = int_{S/b}^{T/b} r^{n-1} 1[|a r^d - xi| <= bound(c r)] dr``.

    For a scalar form homogeneous of degree ``d`` this is the radial integral
    along every unit direction ``u`` with ``f(u) = a``, ``ball(u) = b`` and
    ``nu(u) = c``; with Euclidean norms ``b = c = 1``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.broadcast_to(np.asarray(b, dtype=float), a.shape)
    c = np.broadcast_to(np.asarray(c, dtype=float), a.shape)
    n, d = region.form.n, region.form.degrees[0]
    xi = region.xi[0]

    def member(r, rows=None):
        aa = a if rows is None else a[rows]
        dev = np.abs(aa[:, None] * r**d - xi)
        if region.psi is None:
            return dev <= region.eps[0]
        cc = c if rows is None else c[rows]
        return dev <= region.psi(cc[:, None] * r)[..., 0]

    with np.errstate(divide="ignore", invalid="ignore"):
        rstar = np.where(a * xi > 0, np.abs(xi / a) ** (1.0 / d), np.inf)
    return _radial_scan(member, region.S / b, region.T / b, [rstar], n)


def _chunked_profile(region: Region, a, b, c) -> np.ndarray:
    out = np.empty(len(a))
    for i in range(0, len(a), MC_CHUNK):
        sl = slice(i, i + MC_CHUNK)
        out[sl] = radial_profile(region, a[sl], b[sl], c[sl])
    return out


def _profile_grids(h: float, amax: float, size: int = PROFILE_GRID):
    # dense logarithmic grid on the window (thin shells sit at tiny |a|), linear outside
    side = h * np.logspace(-14, 0, size)
    inner = np.concatenate([-side[::-1], [0.0], side])
    outer = np.linspace(h, max(amax, h * (1 + 1e-9)), size)
    return inner, outer


def _profile_volume(region: Region, samples: int, seed: int) -> VolumeEstimate:
    """Volume from the exact radial profile and the sampled law of ``a = f(u)``.

    The law of ``f(u)`` for uniform directions has a smooth density near zero
    when the zero set is regular; there it is fitted by a linear density on
    ``|a| <= h``, elsewhere the empirical law is used.  For Euclidean norms the
    profile depends on ``a`` alone and is interpolated from a grid, so only
    ``f`` is evaluated per direction.  Otherwise the values ``ball(u)`` and
    ``nu(u)`` inside the window are drawn from a fixed subsample of window
    directions, and directions outside the window get their exact radial
    integral.
    """
    n = region.form.n
    euclid = _euclidean_profile(region)
    reps = min(MC_REPLICATES, samples)
    per = max(1, samples // reps)
    amax = 0.0
    draws = []
    for rep in range(reps):
        u = _qmc_directions(n, per, seed, rep)
        a = np.concatenate([region.form.evaluate(u[i:i + MC_CHUNK])[:, 0] for i in range(0, per, MC_CHUNK)])
        amax = max(amax, float(np.abs(a).max()))
        bc = None if euclid else (np.asarray(region.ball(u)), np.asarray(region.nu(u)))
        draws.append((a, bc))
    h = PROFILE_WINDOW * amax
    inner, outer = _profile_grids(h, amax, PROFILE_GRID if euclid else PROFILE_MIXED_GRID)
    if euclid:
        g_inner = radial_profile(region, inner)
        g_outer_pos = radial_profile(region, outer)
        g_outer_neg = radial_profile(region, -outer)
    means = np.empty(reps)
    for rep, (a, bc) in enumerate(draws):
        win = np.abs(a) <= h
        p0 = win.sum() / (2 * h * per)
        p1 = 3.0 * a[win].sum() / (2 * h**3 * per)
        density = p0 + p1 * inner
        if euclid:
            inner_part = integrate.trapezoid(g_inner * density, inner)
            pos, neg = a[a > h], a[a < -h]
            outer_part = (np.interp(pos, outer, g_outer_pos).sum()
                          + np.interp(-neg, outer, g_outer_neg).sum()) / per
        else:
            b, c = bc
            reps_b, reps_c = b[win][:PROFILE_REPRESENTATIVES], c[win][:PROFILE_REPRESENTATIVES]
            k = len(reps_b)
            if k:
                g = _chunked_profile(region, np.tile(inner, k), np.repeat(reps_b, len(inner)),
                                     np.repeat(reps_c, len(inner))).reshape(k, len(inner))
                inner_part = float(integrate.trapezoid(g * density, inner, axis=1).mean())
            else:
                inner_part = 0.0
            out = ~win
            outer_part = _chunked_profile(region, a[out], b[out], c[out]).sum() / per
        means[rep] = sphere_area(n) * (inner_part + outer_part)
    value = float(means.mean())
    stderr = float(means.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return VolumeEstimate(value, stderr, "MonteCarlo", per * reps)


def _tube_applicable(region: Region) -> bool:
    return type(region.form) is CoordinateMax


def _tube_volume(region: Region, samples: int, seed: int) -> VolumeEstimate:
    """Uniform RQMC over a box around the tube of a coordinate-max region.

    On the annulus ``nu >= S / a`` (with ``ball <= a nu``), so the constrained
    coordinates obey ``|x_i| <= (|xi| + bound(S / a))^(1/z_i)``; the free
    coordinates range over the bounding box of the ball.  Directions almost
    never hit such tubes, which is why the polar estimator is not used here.
    """
    f = region.form
    n = f.n
    nu_lo = region.S / upper_constant(region.nu, region.ball, n)
    top = region.psi(nu_lo)[0] if region.psi is not None else region.eps[0]
    half = np.empty(n)
    half[: f.p] = (abs(region.xi[0]) + top) ** (1.0 / np.asarray(f.z))
    half[f.p:] = region.T * region.ball.coordinate_bounds(n)[f.p:]
    box = float(np.prod(2 * half))
    reps = min(MC_REPLICATES, samples)
    per = max(1, samples // reps)
    means = np.empty(reps)
    for rep in range(reps):
        engine = qmc.Sobol(d=n, scramble=True, seed=np.random.default_rng([seed, rep]))
        pts = engine.random_base2(max(1, math.ceil(math.log2(max(per, 2)))))[:per]
        hits = 0
        for i in range(0, per, MC_CHUNK):
            x = (2 * pts[i:i + MC_CHUNK] - 1) * half
            hits += int(region.contains(x).sum())
        means[rep] = box * hits / per
    value = float(means.mean())
    stderr = float(means.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return VolumeEstimate(value, stderr, "MonteCarlo", per * reps)


def _log_shape_applicable(region: Region) -> bool:
    return type(region.form) is CoordinateProduct


def _log_shape_volume(region: Region, samples: int, seed: int) -> VolumeEstimate:
    """RQMC in logarithmic coordinates for coordinate-product regions.

    Write ``|x_i| = exp(t + w_i)`` with ``sum w_i = 0``.  Then ``dx = n e^{nt} dt dw``
    on each orthant and the ``t`` integral along a shape ``w`` is the polar
    radial integral along ``u = e^w / |e^w|``, scaled by ``|e^w|^{-n}``.  Shapes are
    drawn uniformly from the simplex ``{sum w = 0, max w <= M}`` and orthants
    uniformly.  Near the coordinate axes, where directions carry long radial
    segments, this sampling spends proportionally more points, so the summand
    stays bounded.  ``M`` is chosen so that shapes beyond it contribute below
    ``e^{-40}`` of the bulk summand.
    """
    f = region.form
    n = f.n
    deg = n * float(f.omega)
    t_sup = region.T * upper_constant(region.ball, Norm("sup"), n)
    nu_max = region.T * upper_constant(region.ball, region.nu, n)
    low = float(region.psi(nu_max)[0]) if region.psi is not None else float(region.eps[0])
    M = max(math.log(t_sup) - math.log(low) / deg + 40.0 / n, 1.0)
    simplex = (n * M) ** (n - 1) / math.factorial(n - 1)
    scale = 2.0**n * n * simplex
    reps = min(MC_REPLICATES, samples)
    per = max(1, samples // reps)
    means = np.empty(reps)
    for rep in range(reps):
        engine = qmc.Sobol(d=2 * n, scramble=True, seed=np.random.default_rng([seed, rep]))
        pts = engine.random_base2(max(1, math.ceil(math.log2(max(per, 2)))))[:per]
        acc = 0.0
        for i in range(0, per, MC_CHUNK):
            block = pts[i:i + MC_CHUNK]
            e = -np.log(np.clip(block[:, :n], 1e-300, None))
            w = M - n * M * e / e.sum(axis=1, keepdims=True)
            top = w.max(axis=1)
            expw = np.exp(w - top[:, None])
            length = np.linalg.norm(expw, axis=1)
            signs = np.where(block[:, n:] < 0.5, -1.0, 1.0)
            u = signs * expw / length[:, None]
            weight = np.exp(-n * (top + np.log(length)))
            acc += float(np.sum(weight * _radial_moments(region, u)))
        means[rep] = scale * acc / per
    value = float(means.mean())
    stderr = float(means.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return VolumeEstimate(value, stderr, "MonteCarlo", per * reps)


def mc_volume(region: Region, samples: int, seed: int = 0) -> VolumeEstimate:
    """Randomized quasi Monte Carlo volume of a bounded region.

    In polar coordinates the volume is ``|S^{n-1}| E_u[int r^{n-1} 1[r u in R] dr]``.
    Directions ``u`` come from scrambled Sobol points pushed through the
    Gaussian quantile and normalized; the radial integral is computed exactly
    per direction (analytic interval for constant bounds, grid scan plus
    bisection otherwise), so only the angular variable is sampled.  The
    standard error comes from independent scramblings.

    Scalar homogeneous forms go through :func:`_profile_volume`, whose
    radial integral depends on the direction only through ``f(u)`` and the
    two norms; coordinate-max tubes use :func:`_tube_volume` and
    coordinate products :func:`_log_shape_volume`.
    """
    if samples <= 0:
        raise ValidationError("samples must be positive")
    if not math.isfinite(region.T):
        raise ValidationError("Monte Carlo volume needs a bounded annulus")
    if _profile_applicable(region):
        return _profile_volume(region, samples, seed)
    if _tube_applicable(region):
        return _tube_volume(region, samples, seed)
    if _log_shape_applicable(region):
        return _log_shape_volume(region, samples, seed)
    n = region.form.n
    reps = min(MC_REPLICATES, samples)
    per = max(1, samples // reps)
    means = np.empty(reps)
    for rep in range(reps):
        u = _qmc_directions(n, per, seed, rep)
        acc = 0.0
        for i in range(0, per, MC_CHUNK):
            acc += float(_radial_moments(region, u[i:i + MC_CHUNK]).sum())
        means[rep] = sphere_area(n) * acc / per
    value = float(means.mean())
    stderr = float(means.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return VolumeEstimate(value, stderr, "MonteCarlo", per * reps)


# -- asymptotic model and sphere preimages -----------------------------------------


def regular_volume_asymptotic(form: Form, psi: Psi, S: float, T: float) -> float:
    """Model value ``T^{n-d} prod_j psi_j(T)``; the region volume is comparable to it up to a form constant."""
    d = form.total_degree
    if d >= form.n:
        raise InvalidDegrees(f"total degree {d} must be below n={form.n}")
    if psi.ell != form.ell:
        raise DimensionMismatch("psi and form disagree on ell")
    return float(T ** (form.n - d) * np.prod(psi(T)))


def sphere_preimage_ratio(form: Form, eps, samples: int, seed: int = 0) -> float:
    """``sigma({u in S^{n-1} : |f(u)| <= eps}) / prod(2 eps)`` with ``sigma`` the normalized sphere measure."""
    from .sampling import make_rng, uniform_sphere

    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if eps.shape != (form.ell,) or np.any(eps <= 0):
        raise ValidationError("eps must hold ell positive entries")
    rng = make_rng(seed)
    hits = 0
    for i in range(0, samples, MC_CHUNK):
        u = uniform_sphere(form.n, min(MC_CHUNK, samples - i), rng)
        hits += int(np.all(np.abs(form.evaluate(u)) <= eps, axis=-1).sum())
    return hits / samples / float(np.prod(2 * eps))

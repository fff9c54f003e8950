"""Proof instruments for first-eigenfunction estimates on weighted models.

Given an eigenfunction u of the first non-zero eigenvalue, Delta_phi u = -lambda u,
the normalized form is

    max u = 1, min u = -k (0 < k <= 1),   v = (u - (1-k)/2) / ((1+k)/2),

so that max v = 1, min v = -1 and Delta_phi v = -lambda (v + a) with
a = (1-k)/(1+k) in [0, 1).  With a drift-Ricci lower bound Ric_phi >= (n-1) K g,
define alpha = (n-1)K/2 and delta = alpha/lambda; for any constant b > 1 the
gradient estimate |grad v|^2 / (b^2 - v^2) <= lambda (1 + a) holds, and the
level-set maximum function

    Z(t) = max { |grad v|^2 / (lambda (b^2 - v^2)) : arcsin(v(x)/b) = t }

is dominated by explicit barriers z(t) = 1 + c eta(t) + kappa xi(t), c = a/b,
built from the classical pair of test functions

    xi(t)  = (cos^2 t + 2 t sin t cos t + t^2 - pi^2/4) / cos^2 t,
    eta(t) = ((4/pi) t + (4/pi) cos t sin t - 2 sin t) / cos^2 t.

Both satisfy exact second-order identities,

    (1/2) xi''  cos^2 t - xi'  cos t sin t - xi  = 2 cos^2 t,
    (1/2) eta'' cos^2 t - eta' cos t sin t - eta = -sin t,

which make the touching-point inequality residuals of the barrier method
evaluate to closed forms.  Their numerators vanish at t = +-pi/2, so inside a
small endpoint window the evaluation switches to power series in s = pi/2 - |t|
(coefficients below are exact Taylor coefficients).  Useful exact values:
xi(0) = 1 - pi^2/4, xi(+-pi/2) = 0, eta(+-pi/2) = +-1, int xi dt = -pi,
int eta dt = 0 over [-pi/2, pi/2].

Derivatives of barriers are always analytic; the touching-point residual is
too sensitive for differenced derivatives.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (BarrierDomainError, BarrierHypothesisError,
                     DegenerateEigenfunctionError)
from .geometry import CIRCLE, Grid, WarpedManifold, be_ricci_lower_bound
from .spectral import EigenMode, FiberHarmonic

HALF_PI = math.pi / 2.0

# Exact Taylor coefficients in s = pi/2 - |t| (increasing powers of s).
_XI_SERIES = np.array([
    0.0,
    -2.0 * math.pi / 3.0,
    1.0,
    -4.0 * math.pi / 45.0,
    1.0 / 9.0,
    -4.0 * math.pi / 315.0,
    2.0 / 135.0,
    -8.0 * math.pi / 4725.0,
])
_ETA_SERIES = np.array([
    1.0,
    -8.0 / (3.0 * math.pi),
    0.25,
    -16.0 / (45.0 * math.pi),
    1.0 / 24.0,
    -16.0 / (315.0 * math.pi),
    17.0 / 2880.0,
    -32.0 / (4725.0 * math.pi),
])
_SERIES_WINDOW = 1e-3
_DOMAIN_SLACK = 1e-12


def _series_eval(coeffs: np.ndarray, s: np.ndarray, order: int) -> np.ndarray:
    """Evaluate d^order/dt^order of sum c_k s^k at s = pi/2 - t (t > 0 branch)."""
    k = np.arange(coeffs.size)
    if order == 0:
        c = coeffs
    elif order == 1:
        c = -(coeffs * k)[1:]  # d/dt = -d/ds
    else:
        c = (coeffs * k * (k - 1))[2:]
    return np.polynomial.polynomial.polyval(s, c)


def _check_domain(t: np.ndarray):
    if np.any(np.abs(t) > HALF_PI + _DOMAIN_SLACK) or not np.all(np.isfinite(t)):
        raise BarrierDomainError("test functions are defined on [-pi/2, pi/2]")


def _eval_pair(t, order: int, which: str):
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    _check_domain(t)
    u = np.minimum(np.abs(t), HALF_PI)
    s = HALF_PI - u
    out = np.empty_like(u)
    near = s < _SERIES_WINDOW
    far = ~near
    coeffs = _XI_SERIES if which == "xi" else _ETA_SERIES
    if np.any(near):
        out[near] = _series_eval(coeffs, s[near], order)
    if np.any(far):
        uf = u[far]
        sec2 = 1.0 / np.cos(uf) ** 2
        tan = np.tan(uf)
        if which == "xi":
            p = uf * np.sin(2.0 * uf) + uf**2 - math.pi**2 / 4.0
            p1 = np.sin(2.0 * uf) + 2.0 * uf * np.cos(2.0 * uf) + 2.0 * uf
            if order == 0:
                out[far] = 1.0 + p * sec2
            elif order == 1:
                out[far] = p1 * sec2 + 2.0 * p * sec2 * tan
            else:
                p2 = 4.0 * np.cos(2.0 * uf) - 4.0 * uf * np.sin(2.0 * uf) + 2.0
                out[far] = (p2 * sec2 + 4.0 * p1 * sec2 * tan
                            + p * (4.0 * sec2 * tan**2 + 2.0 * sec2**2))
        else:
            m = (4.0 / math.pi) * uf + (2.0 / math.pi) * np.sin(2.0 * uf) - 2.0 * np.sin(uf)
            m1 = 4.0 / math.pi + (4.0 / math.pi) * np.cos(2.0 * uf) - 2.0 * np.cos(uf)
            if order == 0:
                out[far] = m * sec2
            elif order == 1:
                out[far] = m1 * sec2 + 2.0 * m * sec2 * tan
            else:
                m2 = -(8.0 / math.pi) * np.sin(2.0 * uf) + 2.0 * np.sin(uf)
                out[far] = (m2 * sec2 + 4.0 * m1 * sec2 * tan
                            + m * (4.0 * sec2 * tan**2 + 2.0 * sec2**2))
    # parity: xi is even, eta is odd
    neg = t < 0.0
    if which == "xi":
        if order == 1:
            out[neg] = -out[neg]
    else:
        if order != 1:
            out[neg] = -out[neg]
    return float(out[0]) if scalar else out


def xi(t):
    """Even test function; xi(0) = 1 - pi^2/4, xi(+-pi/2) = 0, int xi = -pi."""
    return _eval_pair(t, 0, "xi")


def xi_d1(t):
    return _eval_pair(t, 1, "xi")


def xi_d2(t):
    return _eval_pair(t, 2, "xi")


def eta(t):
    """Odd test function; eta(0) = 0, eta(+-pi/2) = +-1, int eta = 0."""
    return _eval_pair(t, 0, "eta")


def eta_d1(t):
    return _eval_pair(t, 1, "eta")


def eta_d2(t):
    return _eval_pair(t, 2, "eta")


def _sample_derivative(y: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(y, -1) - np.roll(y, 1)) / (2.0 * h)
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2.0 * h)
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
    d[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * h)
    return d


@dataclass(frozen=True)
class NormalizedEigenfunction:
    """The normalized first eigenfunction v with its estimate constants.

    max v = 1 and min v = -1 over the manifold samples; lam > 0 is the
    eigenvalue, k and a the asymmetry constants, b > 1 the gradient-estimate
    parameter, c = a/b, alpha = (n-1)K/2 and delta = alpha/lam.  For angular
    modes l >= 1, v is the affine image (scaled radial factor) x (zonal fiber
    harmonic over latitudes ``psi``) minus the constant ``shift``; the shift
    is zero whenever the fiber harmonic attains -1 (odd degrees, or any degree
    on 2-dimensional models), and equals a otherwise.
    """

    model: WarpedManifold
    grid: Grid
    l: int
    lam: float
    k: float
    a: float
    b: float
    K: float
    v_rad: np.ndarray
    dv_rad: np.ndarray
    fiber: FiberHarmonic | None
    psi: np.ndarray | None
    shift: float
    residual_inf: float

    @property
    def c(self) -> float:
        return self.a / self.b

    @property
    def alpha(self) -> float:
        return 0.5 * (self.model.n - 1) * self.K

    @property
    def delta(self) -> float:
        return self.alpha / self.lam

    def manifold_values(self) -> np.ndarray:
        """Flattened samples of v over the manifold sampling."""
        if self.fiber is None:
            return self.v_rad
        return (np.outer(self.v_rad, self.fiber.value_at(self.psi)) - self.shift).ravel()

    def manifold_grad_sq(self) -> np.ndarray:
        """Flattened |grad v|^2 at the same sample points (shifts drop out)."""
        if self.fiber is None:
            return self.dv_rad**2
        g = self.fiber.value_at(self.psi)
        gp = self.fiber.dpsi_at(self.psi)
        wv = np.asarray(self.model.w.value(self.grid.nodes), dtype=float)
        radial = np.outer(self.dv_rad, g) ** 2
        angular = np.outer(self.v_rad / wv, gp) ** 2
        return (radial + angular).ravel()


def normalize(mode: EigenMode, K: float | None = None, b: float = 1.01,
              psi_points: int = 241) -> NormalizedEigenfunction:
    """Fix sign and scale of an eigenfunction, returning v with its constants.

    The sign is chosen so that max u >= -min u over the manifold, then u is
    rescaled to max u = 1, min u = -k, and mapped to
    v = (u - (1-k)/2) / ((1+k)/2).  For angular modes the extremes are taken
    over the (radial x latitude) product samples: odd fiber harmonics reach -1
    and give the symmetric case k = 1, a = 0, while even degrees >= 2 on
    fibers of dimension >= 2 bottom out above -1 and produce a genuine
    asymmetry constant.  The eigen-relation Delta_phi v = -lam (v + a) is
    re-checked on the grid through the assembled operator; the residual
    sup-norm is stored.
    """
    if b <= 1.0:
        raise ValueError("the gradient-estimate constant b must exceed 1")
    lam = -mode.mu
    if lam <= 0.0:
        raise DegenerateEigenfunctionError(
            f"eigenvalue mu={mode.mu:.3e} does not define a first non-zero mode")
    u = np.array(mode.u, dtype=float)
    umax, umin = float(u.max()), float(u.min())
    if umax - umin <= 1e-12 * max(1.0, abs(umax)):
        raise DegenerateEigenfunctionError("eigenfunction is constant up to rounding")

    model, grid = mode.problem.model, mode.problem.grid
    periodic = model.topology == CIRCLE
    if mode.l >= 1 and not periodic:
        fiber = FiberHarmonic(n=model.n, l=mode.l)
        psi = np.linspace(0.0, math.pi, psi_points)
        product = np.outer(u, fiber.value_at(psi))
        pmax, pmin = float(product.max()), float(product.min())
        if -pmin > pmax:
            u, pmax, pmin = -u, -pmin, -pmax
        k = -pmin / pmax
        a = (1.0 - k) / (1.0 + k)
        # v = (u G / pmax - (1-k)/2) / ((1+k)/2) = (scaled u) G - a
        v_rad = u * (2.0 / ((1.0 + k) * pmax))
        shift = a
    else:
        if -umin > umax:
            u = -u
        u = u / float(u.max())
        k = -float(u.min())
        a = (1.0 - k) / (1.0 + k)
        v_rad = (u - (1.0 - k) / 2.0) / ((1.0 + k) / 2.0)
        fiber = None
        psi = None
        shift = 0.0

    if K is None:
        K = be_ricci_lower_bound(model, grid).K if not periodic else 0.0

    # for separated modes v + a = (scaled u) G, so the radial relation is the
    # same in both branches: apply(v_rad) + lam * (v_rad + radial constant)
    res = mode.problem.apply(v_rad) + lam * (v_rad + (a - shift))
    residual_inf = float(np.max(np.abs(res)))
    if residual_inf > 1e-6 * lam:
        warnings.warn(
            f"normalized eigen-relation residual {residual_inf:.3e} is large; "
            "the input may not be an eigenfunction of this discretization",
            UserWarning, stacklevel=2)

    return NormalizedEigenfunction(
        model=model, grid=grid, l=mode.l, lam=lam, k=k, a=a, b=float(b), K=float(K),
        v_rad=v_rad, dv_rad=_sample_derivative(v_rad, grid.spacing, periodic),
        fiber=fiber, psi=psi, shift=shift, residual_inf=residual_inf,
    )


@dataclass(frozen=True)
class GradientMargin:
    """Slack in the gradient estimate sup |grad v|^2/(b^2 - v^2) <= lam (1 + a)."""

    margin: float
    sup_ratio: float
    bound: float


def gradient_estimate_margin(nef: NormalizedEigenfunction,
                             b: float | None = None) -> GradientMargin:
    b = nef.b if b is None else float(b)
    if b <= 1.0:
        raise ValueError("b must exceed 1")
    v = nef.manifold_values()
    ratio = nef.manifold_grad_sq() / (b * b - v * v)
    sup = float(ratio.max())
    bound = nef.lam * (1.0 + nef.a)
    return GradientMargin(margin=bound - sup, sup_ratio=sup, bound=bound)


@dataclass(frozen=True)
class LevelSetMaxima:
    """Binned maxima of |grad v|^2 / (lam (b^2 - v^2)) over level sets of
    t = arcsin(v/b); empty bins are marked NaN, never interpolated."""

    edges: np.ndarray
    values: np.ndarray
    arg_t: np.ndarray
    counts: np.ndarray
    b: float
    lam: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def occupied(self) -> np.ndarray:
        return self.counts > 0


def compute_Z(nef: NormalizedEigenfunction, t_bins=200) -> LevelSetMaxima:
    """Per-bin maxima of the normalized gradient quantity over t-level sets."""
    tb = math.asin(1.0 / nef.b)
    if np.isscalar(t_bins):
        edges = np.linspace(-tb, tb, int(t_bins) + 1)
    else:
        edges = np.asarray(t_bins, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0.0):
            raise ValueError("bin edges must be a 1-d increasing array")
    nb = edges.size - 1
    v = nef.manifold_values()
    t = np.arcsin(v / nef.b)
    val = nef.manifold_grad_sq() / (nef.lam * (nef.b**2 - v * v))
    inside = (t >= edges[0]) & (t <= edges[-1])
    if not np.any(inside):
        raise ValueError("all level-set bins are empty; the bins do not cover the data")
    t, val = t[inside], val[inside]
    idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, nb - 1)
    values = np.full(nb, -np.inf)
    np.maximum.at(values, idx, val)
    arg_t = np.full(nb, np.nan)
    hit = np.flatnonzero(val >= values[idx])
    for s in hit[::-1]:  # reversed so the first maximizing sample wins
        arg_t[idx[s]] = t[s]
    counts = np.bincount(idx, minlength=nb)
    values[counts == 0] = np.nan
    return LevelSetMaxima(edges=edges, values=values, arg_t=arg_t,
                          counts=counts, b=nef.b, lam=nef.lam)


@dataclass(frozen=True)
class BarrierFamily:
    """Comparison function z(t) = 1 + (a/b) eta(t) + kappa xi(t).

    The standard family has kappa = mu * delta; the variant used in the
    smallest-asymmetry case of the eigenvalue theorem has
    kappa = delta - sigma (a/b)^2 with an explicit sigma.  The comparison
    domain is [-arcsin(1/b), arcsin(1/b)], but values extend smoothly to
    [-pi/2, pi/2] for the length integrals.
    """

    a: float
    b: float
    delta: float
    mu: float | None
    sigma: float | None
    label: str

    @property
    def c(self) -> float:
        return self.a / self.b

    @property
    def xi_coeff(self) -> float:
        if self.sigma is None:
            return self.mu * self.delta
        return self.delta - self.sigma * self.c**2

    def domain(self) -> tuple[float, float]:
        tb = math.asin(1.0 / self.b)
        return (-tb, tb)

    def value(self, t):
        return 1.0 + self.c * eta(t) + self.xi_coeff * xi(t)

    def d1(self, t):
        return self.c * eta_d1(t) + self.xi_coeff * xi_d1(t)

    def d2(self, t):
        return self.c * eta_d2(t) + self.xi_coeff * xi_d2(t)


def _validate_barrier(z: BarrierFamily):
    if z.a < 0.0:
        raise BarrierHypothesisError("barrier needs a >= 0")
    if z.b <= 1.0:
        raise BarrierHypothesisError("barrier needs b > 1")
    if not (0.0 < z.delta <= 0.5 + _DOMAIN_SLACK):
        raise BarrierHypothesisError("barrier needs delta in (0, 1/2]")
    lo, hi = z.domain()
    sweep = z.value(np.linspace(lo, hi, 1001))
    if np.any(sweep <= 0.0):
        raise BarrierHypothesisError(
            f"barrier is not positive on its domain (min {float(np.min(sweep)):.3e})")


def barrier(a: float, b: float, delta: float, mu: float) -> BarrierFamily:
    """Standard barrier 1 + (a/b) eta + mu delta xi with mu in (0, 1]."""
    if not (0.0 < mu <= 1.0 + _DOMAIN_SLACK):
        raise BarrierHypothesisError("barrier needs mu in (0, 1]")
    z = BarrierFamily(a=float(a), b=float(b), delta=float(delta), mu=float(mu),
                      sigma=None, label="standard")
    _validate_barrier(z)
    return z


def case_b2b2_barrier(a: float, b: float, delta: float, sigma: float) -> BarrierFamily:
    """Variant barrier 1 + (a/b) eta + (delta - sigma (a/b)^2) xi.

    sigma is an explicit input; the xi coefficient must stay positive for the
    barrier to make sense, which is checked here along with positivity of z.
    """
    z = BarrierFamily(a=float(a), b=float(b), delta=float(delta), mu=None,
                      sigma=float(sigma), label="b2b2")
    if z.xi_coeff <= 0.0:
        raise BarrierHypothesisError(
            f"delta - sigma c^2 = {z.xi_coeff:.3e} lost the sign required for validity")
    _validate_barrier(z)
    return z


def barrier_z(t, a: float, b: float, delta: float, mu: float):
    """Evaluate the standard barrier at t."""
    return barrier(a, b, delta, mu).value(t)


def barrier_z_case_b2b2(t, a: float, b: float, delta: float, sigma: float):
    """Evaluate the variant barrier at t; sigma = 0 degenerates to mu = 1."""
    return case_b2b2_barrier(a, b, delta, sigma).value(t)


@dataclass(frozen=True)
class DominanceReport:
    """Margins z(t*) - Z(t*) per occupied bin, at each bin's maximizing t*."""

    margins: np.ndarray
    min_margin: float
    worst_t: float
    occupied_bins: int


def barrier_dominance_check(levelset: LevelSetMaxima, z) -> DominanceReport:
    """Check Z(t) <= z(t) at grid resolution; nonnegative minimum certifies it.

    ``z`` may be a BarrierFamily or any callable; margins are computed at the
    maximizing t of each occupied bin, so no values are fabricated for empty
    bins.
    """
    zf = z.value if isinstance(z, BarrierFamily) else z
    occ = levelset.occupied
    margins = np.full(levelset.values.size, np.nan)
    tvals = levelset.arg_t[occ]
    margins[occ] = np.asarray(zf(tvals), dtype=float) - levelset.values[occ]
    finite = margins[occ]
    i = int(np.argmin(finite))
    return DominanceReport(margins=margins, min_margin=float(finite[i]),
                           worst_t=float(tvals[i]), occupied_bins=int(occ.sum()))


@dataclass(frozen=True)
class TestEstimateResult:
    """Touching-point inequality residuals for barrier candidates.

    ``full`` is the complete right-hand side; the two corollary forms are
    evaluated unconditionally and tagged with applicability of their
    hypotheses (monotonicity and range of z at the touching point).
    """

    full: np.ndarray
    cor6_value: np.ndarray
    cor6_applicable: np.ndarray
    cor7_value: np.ndarray
    cor7_applicable: np.ndarray


def test_estimate_residual(z, zdot, zddot, t0, c: float, delta: float,
                           a: float | None = None) -> TestEstimateResult:
    """Right-hand side of the touching-point inequality at t0.

    For a valid barrier touched from below by Z at t0 with z(t0) > 0, the
    maximum principle forces this quantity to be >= 0; barrier families are
    designed so that it is <= 0 away from degenerate configurations, which is
    what rules the touching out.  ``a`` (the asymmetry constant) tightens the
    first corollary's range check; it defaults to c, the strictest choice.
    """
    z, zdot, zddot, t0 = np.broadcast_arrays(
        np.atleast_1d(np.asarray(z, dtype=float)),
        np.asarray(zdot, dtype=float), np.asarray(zddot, dtype=float),
        np.asarray(t0, dtype=float))
    _check_domain(t0)
    if np.any(z <= 0.0):
        raise BarrierHypothesisError("the touching-point inequality requires z(t0) > 0")
    a_eff = c if a is None else float(a)
    cos, sin = np.cos(t0), np.sin(t0)
    cos2 = cos * cos
    base = 0.5 * zddot * cos2 - zdot * cos * sin - z + 1.0
    cor6 = base + c * sin - 2.0 * delta * cos2
    full = cor6 - (zdot / (4.0 * z)) * cos * (zdot * cos - 2.0 * z * sin + 2.0 * sin + 2.0 * c)
    cor7 = base - 2.0 * delta * cos2
    tiny = 1e-12
    cor6_ok = (zdot >= -tiny) & (z >= 1.0 - c - tiny) & (z <= 1.0 + a_eff + tiny)
    cor7_ok = (abs(a_eff) <= tiny) & (zdot * sin >= -tiny) & (z <= 1.0 + tiny)
    return TestEstimateResult(full=full, cor6_value=cor6, cor6_applicable=cor6_ok,
                              cor7_value=cor7, cor7_applicable=cor7_ok)


@dataclass(frozen=True)
class LengthIntegralLedger:
    """The three quantities of the transit-length comparison and their margins.

    sqrt(lam) * d  >=  int dt / sqrt(z)  >=  (pi^3 / int z dt)^{1/2};
    the second step is Holder's inequality and must hold up to quadrature
    error regardless of the geometry.
    """

    sqrt_lam_diam: float
    transit_integral: float
    holder_bound: float
    z_integral: float
    margin_transit: float
    margin_holder: float


def length_integral_check(nef: NormalizedEigenfunction, z: BarrierFamily,
                          d: float) -> LengthIntegralLedger:
    """Evaluate the transit-length chain for a normalized eigenfunction."""
    if d <= 0.0:
        raise ValueError("the diameter must be positive")
    if abs(z.a - nef.a) > 1e-6 or abs(z.b - nef.b) > 1e-12:
        warnings.warn(
            f"barrier parameters (a={z.a:g}, b={z.b:g}) do not match the "
            f"eigenfunction constants (a={nef.a:.3g}, b={nef.b:g})",
            UserWarning, stacklevel=2)
    sweep = z.value(np.linspace(-HALF_PI, HALF_PI, 2001))
    if np.any(sweep <= 0.0):
        raise BarrierHypothesisError("barrier is not positive on [-pi/2, pi/2]")
    transit, _ = quad(lambda t: 1.0 / math.sqrt(z.value(t)), -HALF_PI, HALF_PI,
                      limit=200, epsabs=1e-12, epsrel=1e-12)
    z_int, _ = quad(z.value, -HALF_PI, HALF_PI, limit=200, epsabs=1e-12, epsrel=1e-12)
    holder = math.sqrt(math.pi**3 / z_int)
    lhs = math.sqrt(nef.lam) * d
    return LengthIntegralLedger(
        sqrt_lam_diam=lhs, transit_integral=transit, holder_bound=holder,
        z_integral=z_int, margin_transit=lhs - transit,
        margin_holder=transit - holder,
    )

"""Self-adjoint discretization and low spectrum of the drift Laplacian.

The Bakry-Emery (drift) Laplacian of a weighted manifold is
Delta_phi = Delta - grad(phi) . grad, self-adjoint in L^2(e^{-phi} dV).
On a rotationally symmetric model, separation into angular modes l >= 0
reduces it to the radial Sturm-Liouville operator

    u  ->  (1/rho) (rho u')' - l (l + n - 2) / w^2 * u,
    rho = w^{n-1} e^{-phi},

acting on [0, L]; the circle keeps the full periodic operator
(1/rho)(rho u')' with rho = e^{-phi}.

Discretization is a cell-centered finite-volume scheme with half-node
coefficients rho_{i+1/2}: flux differences make the matrix exactly symmetric
with respect to the weighted inner product <u, v> = sum q_i u_i v_i, constants
lie in the kernel of the l = 0 operator by construction, and the spectrum is
real and nonpositive up to rounding.  At the poles, rho vanishes, so the
boundary flux is zero; this encodes the regularity (Neumann-type) condition
for l = 0, while for l >= 1 the singular potential l(l+n-2)/w^2 enforces the
Dirichlet decay of the eigenfunctions.

Eigenpairs come from the symmetric tridiagonal similarity transform
S = D A D^{-1}, D = diag(sqrt(rho_i)), solved by bisection plus inverse
iteration (LAPACK stebz/stein via scipy), which is deterministic.  The
periodic circle matrix has wrap-around corners and is solved densely.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal
from scipy.special import eval_gegenbauer

from .errors import AssemblyError, SolverError
from .geometry import (CIRCLE, INTERVAL_SPHERE, Grid, WarpedManifold,
                       be_ricci_lower_bound, measure_density)


class SpectralGapWarning(UserWarning):
    """The gap above the reported eigenvalue is within discretization error."""


@dataclass(frozen=True)
class SpectralProblem:
    """Assembled radial (or periodic) drift-Laplacian operator for one angular mode.

    ``diag``/``off_diag`` store the symmetrized tridiagonal form; ``corner``
    is the periodic wrap coupling (circles only).  ``sqrt_rho`` maps
    symmetrized eigenvectors back to eigenfunctions, u = y / sqrt(rho).
    """

    model: WarpedManifold
    grid: Grid
    l: int
    diag: np.ndarray
    off_diag: np.ndarray
    corner: float
    sqrt_rho: np.ndarray
    bc: tuple[str, str]

    @property
    def periodic(self) -> bool:
        return self.model.topology == CIRCLE

    @property
    def size(self) -> int:
        return int(self.diag.size)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Apply the (unsymmetrized) operator to radial samples."""
        y = self.sqrt_rho * np.asarray(u, dtype=float)
        out = self.diag * y
        out[:-1] += self.off_diag * y[1:]
        out[1:] += self.off_diag * y[:-1]
        if self.periodic and self.corner != 0.0:
            out[0] += self.corner * y[-1]
            out[-1] += self.corner * y[0]
        return out / self.sqrt_rho

    def dense_operator(self) -> np.ndarray:
        """Dense matrix of the operator acting on radial samples (small grids)."""
        s = np.diag(self.diag)
        idx = np.arange(self.size - 1)
        s[idx, idx + 1] = self.off_diag
        s[idx + 1, idx] = self.off_diag
        if self.periodic and self.corner != 0.0:
            s[0, -1] = self.corner
            s[-1, 0] = self.corner
        return s * self.sqrt_rho[None, :] / self.sqrt_rho[:, None]


def angular_eigenvalue(n: int, l: int) -> float:
    """Eigenvalue l (l + n - 2) of degree-l spherical harmonics on the fiber."""
    return float(l * (l + n - 2))


@dataclass(frozen=True)
class FiberHarmonic:
    """Zonal spherical harmonic of degree l on the fiber S^{n-1}, normalized to 1
    at the fiber pole; for n = 2 this is cos(l psi), otherwise a Gegenbauer
    polynomial in cos(psi)."""

    n: int
    l: int

    def value_at(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=float)
        if self.n == 2:
            return np.cos(self.l * psi)
        alpha = (self.n - 2) / 2.0
        norm = eval_gegenbauer(self.l, alpha, 1.0)
        return eval_gegenbauer(self.l, alpha, np.cos(psi)) / norm

    def dpsi_at(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=float)
        if self.l == 0:
            return np.zeros_like(psi)
        if self.n == 2:
            return -self.l * np.sin(self.l * psi)
        alpha = (self.n - 2) / 2.0
        norm = eval_gegenbauer(self.l, alpha, 1.0)
        dpoly = 2.0 * alpha * eval_gegenbauer(self.l - 1, alpha + 1.0, np.cos(psi)) / norm
        return -np.sin(psi) * dpoly


def assemble(model: WarpedManifold, grid: Grid, l: int) -> SpectralProblem:
    """Assemble the symmetric tridiagonal operator for angular mode l."""
    if l < 0 or int(l) != l:
        raise AssemblyError(f"angular mode must be a nonnegative integer, got {l!r}")
    l = int(l)
    h = grid.spacing
    nodes = grid.nodes
    rho_c = measure_density(model, nodes)
    if np.any(rho_c <= 0.0) or not np.all(np.isfinite(rho_c)):
        raise AssemblyError("measure density is not positive and finite on the grid")

    if model.topology == INTERVAL_SPHERE:
        faces = nodes[:-1] + 0.5 * h
        rho_f = measure_density(model, faces)
        coupling = rho_f / (h * h)
        diag = np.zeros(grid.size)
        diag[:-1] -= coupling / rho_c[:-1]
        diag[1:] -= coupling / rho_c[1:]
        if l >= 1:
            wv = np.asarray(model.w.value(nodes), dtype=float)
            potential = angular_eigenvalue(model.n, l) / wv**2
            if not np.all(np.isfinite(potential)):
                raise AssemblyError(
                    "angular potential overflows at the poles; grid nodes must stay interior")
            diag -= potential
            bc = ("dirichlet", "dirichlet")
        else:
            bc = ("regular", "regular")
        off = coupling / np.sqrt(rho_c[:-1] * rho_c[1:])
        corner = 0.0
    else:
        faces = nodes + 0.5 * h
        rho_f = measure_density(model, faces)
        coupling = rho_f / (h * h)
        diag = np.zeros(grid.size)
        nxt = np.roll(np.arange(grid.size), -1)
        diag -= coupling / rho_c
        diag[nxt] -= coupling / rho_c[nxt]
        off = coupling[:-1] / np.sqrt(rho_c[:-1] * rho_c[1:])
        corner = float(coupling[-1] / math.sqrt(rho_c[-1] * rho_c[0]))
        bc = ("periodic", "periodic")

    return SpectralProblem(model=model, grid=grid, l=l, diag=diag, off_diag=off,
                           corner=corner, sqrt_rho=np.sqrt(rho_c), bc=bc)


@dataclass(frozen=True)
class EigenMode:
    """One computed eigenpair: Delta_phi u = mu u with radial samples u."""

    mu: float
    l: int
    u: np.ndarray
    problem: SpectralProblem

    @property
    def lam(self) -> float:
        """lambda = -mu, positive for non-constant modes."""
        return -self.mu

    def manifold_samples(self, psi_points: int = 181) -> np.ndarray:
        """The eigenfunction over the manifold sampling: the radial profile for
        l = 0 (and circles), or the (radial x latitude) tensor with the zonal
        fiber harmonic for l >= 1."""
        if self.l == 0 or self.problem.periodic:
            return self.u
        psi = np.linspace(0.0, math.pi, psi_points)
        fiber = FiberHarmonic(n=self.problem.model.n, l=self.l)
        return np.outer(self.u, fiber.value_at(psi))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by magnitude, with weighted-orthonormal eigenfunctions."""

    modes: tuple[EigenMode, ...]
    model: WarpedManifold
    grid: Grid

    def eigenvalues(self) -> np.ndarray:
        return np.array([m.mu for m in self.modes])

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)


def _postprocess(problem: SpectralProblem, vals: np.ndarray, vecs: np.ndarray) -> list[EigenMode]:
    q = problem.grid.weights
    modes = []
    for j in range(vals.size):
        u = vecs[:, j] / problem.sqrt_rho
        u = u / math.sqrt(float(np.dot(q, u * u)))
        i = int(np.argmax(np.abs(u)))
        if u[i] < 0.0:
            u = -u
        modes.append(EigenMode(mu=float(vals[j]), l=problem.l, u=u, problem=problem))
    modes.sort(key=lambda m: (abs(m.mu), m.l))
    return modes


def solve_eigen(problem: SpectralProblem, count: int) -> Spectrum:
    """The ``count`` eigenvalues of smallest magnitude, with eigenfunctions.

    The spectrum is nonpositive, so smallest magnitude means algebraically
    largest; those are computed by bisection and inverse iteration on the
    symmetrized tridiagonal matrix (dense solve for the periodic circle).
    Deterministic for fixed inputs.
    """
    n = problem.size
    if count < 1:
        raise ValueError("count must be >= 1")
    count = min(count, n)
    lo, hi = n - count, n - 1
    try:
        if problem.periodic:
            s = np.diag(problem.diag)
            idx = np.arange(n - 1)
            s[idx, idx + 1] = problem.off_diag
            s[idx + 1, idx] = problem.off_diag
            s[0, -1] += problem.corner
            s[-1, 0] += problem.corner
            vals, vecs = eigh(s, subset_by_index=[lo, hi])
        else:
            vals, vecs = eigh_tridiagonal(problem.diag, problem.off_diag,
                                          select="i", select_range=(lo, hi))
    except LinAlgError as exc:
        raise SolverError(
            f"eigensolver failed for l={problem.l}, N={n}: {exc}",
            report={"l": problem.l, "size": n,
                    "diag_range": (float(problem.diag.min()), float(problem.diag.max())),
                    "off_max": float(np.max(np.abs(problem.off_diag))) if n > 1 else 0.0},
        ) from exc
    modes = _postprocess(problem, vals[::-1].copy(), vecs[:, ::-1].copy())
    return Spectrum(modes=tuple(modes), model=problem.model, grid=problem.grid)


def merge_spectra(spectra: list[Spectrum]) -> Spectrum:
    """Merge per-mode spectra into one list sorted by |mu| (ties by l)."""
    if not spectra:
        raise ValueError("nothing to merge")
    modes = [m for s in spectra for m in s.modes]
    modes.sort(key=lambda m: (abs(m.mu), m.l))
    return Spectrum(modes=tuple(modes), model=spectra[0].model, grid=spectra[0].grid)


def solve_low_spectrum(model: WarpedManifold, grid: Grid, count: int = 6,
                       l_max: int = 2) -> Spectrum:
    """Low spectrum across angular modes 0..l_max (single periodic solve for circles)."""
    if model.topology == CIRCLE:
        return solve_eigen(assemble(model, grid, 0), count)
    spectra = [solve_eigen(assemble(model, grid, l), count) for l in range(l_max + 1)]
    return merge_spectra(spectra)


def _nonzero_candidates(spectrum: Spectrum) -> list[EigenMode]:
    """Drop the constant mode: the single largest eigenvalue of the l=0 (or
    periodic) sector, whose kernel is exactly the constants."""
    zero_sectors = {}
    for m in spectrum.modes:
        if m.l == 0 or m.problem.periodic:
            key = id(m.problem)
            if key not in zero_sectors or m.mu > zero_sectors[key].mu:
                zero_sectors[key] = m
    dropped = {id(m) for m in zero_sectors.values()}
    return [m for m in spectrum.modes if id(m) not in dropped]


@dataclass(frozen=True)
class FirstEigenvalue:
    """First non-zero eigenvalue lambda with its eigenmode and error estimate."""

    lam: float
    mode: EigenMode
    error_estimate: float
    gap: float
    ambiguous: bool


def first_nonzero_eigenvalue(model: WarpedManifold, grid: Grid, l_max: int = 2,
                             count: int = 4, richardson: bool = True) -> FirstEigenvalue:
    """Smallest lambda > 0 with Delta_phi u = -lambda u, searched over l <= l_max.

    A coarsened solve at half resolution provides a Richardson error estimate
    (second-order scheme: |lam_N - lam_{N/2}| / 3).  If the spectral gap above
    lambda is smaller than that estimate, a SpectralGapWarning is emitted.
    The drift-Ricci lower bound is checked and a warning is emitted when it is
    not positive, since the downstream eigenvalue bounds assume K > 0.
    """
    if model.topology == INTERVAL_SPHERE:
        bound = be_ricci_lower_bound(model, grid)
        if not bound.positive:
            warnings.warn(
                f"Bakry-Emery Ricci lower bound is not positive (K_eff={bound.K:.3e} "
                f"at r={bound.radius:.3f}); eigenvalue bounds assuming K > 0 do not apply",
                UserWarning, stacklevel=2)

    def _lam(g: Grid) -> tuple[float, EigenMode, list[EigenMode]]:
        cands = _nonzero_candidates(solve_low_spectrum(model, g, count=count, l_max=l_max))
        if not cands:
            raise SolverError("no non-constant eigenvalues computed; increase count")
        best = min(cands, key=lambda m: (-m.mu, m.l))
        return -best.mu, best, cands

    lam, mode, cands = _lam(grid)
    err = math.nan
    if richardson and grid.size >= 8:
        coarse = Grid.uniform(model, grid.size // 2)
        lam_c, _, _ = _lam(coarse)
        err = abs(lam - lam_c) / 3.0
    cluster = max(20.0 * (0.0 if math.isnan(err) else err), 1e-7 * max(1.0, lam))
    above = [-m.mu for m in cands if (-m.mu) > lam + cluster]
    gap = (min(above) - lam) if above else math.inf
    ambiguous = (not math.isnan(err)) and gap < err
    if ambiguous:
        warnings.warn(
            f"spectral gap {gap:.3e} above lambda_1 is below the discretization "
            f"error estimate {err:.3e}; the reported eigenvalue may be ambiguous",
            SpectralGapWarning, stacklevel=2)
    return FirstEigenvalue(lam=lam, mode=mode, error_estimate=err, gap=gap,
                           ambiguous=ambiguous)


@dataclass(frozen=True)
class MembershipVerdict:
    """Whether the low spectrum contains a target value within tolerance."""

    contained: bool
    nearest: float
    gap: float
    tolerance: float
    count_used: int


def spectrum_contains(model: WarpedManifold, grid: Grid, target: float, tol: float,
                      l_max: int = 2) -> MembershipVerdict:
    """True iff some computed eigenvalue lies within tol * max(1, |target|) of target.

    The solve depth grows until the computed window reaches below the target
    (or the full matrix spectrum is exhausted), so a negative verdict is
    meaningful.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    window = tol * max(1.0, abs(target))
    count = 8
    while True:
        spectrum = solve_low_spectrum(model, grid, count=count, l_max=l_max)
        mus = spectrum.eigenvalues()
        covered = float(mus.min()) <= target - window or count >= grid.size
        if covered:
            break
        count = min(2 * count, grid.size)
    i = int(np.argmin(np.abs(mus - target)))
    nearest = float(mus[i])
    gap = abs(nearest - target)
    return MembershipVerdict(contained=gap <= window, nearest=nearest, gap=gap,
                             tolerance=window, count_used=count)


def weighted_symmetry_defect(problem: SpectralProblem, vectors: int = 6) -> float:
    """max |<Au, v> - <u, Av>| over a fixed family of smooth test vectors,
    relative to the Cauchy-Schwarz scale ||Au|| ||v|| + ||u|| ||Av|| in the
    weighted norm; zero up to rounding for this discretization."""
    q = problem.grid.weights
    r = problem.grid.nodes
    span = problem.model.L

    def _norm(x):
        return math.sqrt(float(np.dot(q, x * x)))

    tests = [np.cos((k + 1) * math.pi * r / span) + 0.5 * np.sin((k + 2) * math.pi * r / span)
             for k in range(vectors)]
    worst = 0.0
    for i, u in enumerate(tests):
        au = problem.apply(u)
        for v in tests[i + 1:]:
            av = problem.apply(v)
            lhs = float(np.dot(q, au * v))
            rhs = float(np.dot(q, u * av))
            scale = _norm(au) * _norm(v) + _norm(u) * _norm(av) + 1e-300
            worst = max(worst, abs(lhs - rhs) / scale)
    return worst

"""driftlab: a numerical laboratory for drift-Laplacian spectral geometry.

Computes first non-zero eigenvalues of Bakry-Emery (drift) Laplacians on
weighted model manifolds, verifies gradient/barrier estimates on computed
eigenfunctions, certifies closed-form eigenvalue and diameter bounds in exact
rational arithmetic, and checks the gradient shrinking soliton equation with
all of its derived identities.
"""

__version__ = "0.1.0"

from .bounds import (BoundReport, DiameterBoundDerivation, GapVerdict, LingCase,
                     build_bound_report, derive_diameter_bound, gap_classifier,
                     lichnerowicz_be, ling_be_bound, ling_case, myers_upper,
                     prop8_bound, prop9_bound, soliton_diameter_lower)
from .estimates import (BarrierFamily, LevelSetMaxima,
                        NormalizedEigenfunction, barrier, barrier_dominance_check,
                        barrier_z, barrier_z_case_b2b2, case_b2b2_barrier,
                        compute_Z, eta, gradient_estimate_margin,
                        length_integral_check, normalize, test_estimate_residual,
                        xi)
from .geometry import (CIRCLE, INTERVAL_SPHERE, CurvatureProfile, Grid,
                       RadialProfile, WarpedManifold, be_ricci_lower_bound,
                       circle, circle_cosine_density, cosine_density, curvature,
                       diameter, integrate, interval_sphere, poly_cos_density,
                       profile_from_samples, sphere, sphere_warp,
                       stretched_sphere_warp, unit_fiber_area, weighted_measure,
                       zero_density)
from .solitons import (EigenIdentityReport, HamiltonIdentityLedger,
                       NormalizedPotential, SolitonCandidate, SolitonResidual,
                       eigenfunction_identity, hamilton_identities, normalize_f,
                       soliton_residual)
from .spectral import (EigenMode, FiberHarmonic, FirstEigenvalue, MembershipVerdict,
                       SpectralProblem, Spectrum, assemble,
                       first_nonzero_eigenvalue, merge_spectra, solve_eigen,
                       solve_low_spectrum, spectrum_contains)

__all__ = [name for name in dir() if not name.startswith("_")]

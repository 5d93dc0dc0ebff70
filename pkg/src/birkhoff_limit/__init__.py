"""Limit laws for renormalized Birkhoff sums of x^-a over circle rotations.

The package builds every object on the way from S(alpha, x, N) / N^a to the
lattice functional D_eps: capped observables, Fourier and resonant models,
Gauss-reduced lattices and Monte Carlo laws.  Hot loops live in a compiled
extension with a numpy fallback (see ``birkhoff_limit._backend``).
"""

from ._backend import name as backend
from .fourier_models import (LimitCoeffs, OscCoeffs, ResonanceError, limit_coeffs,
                             model_sum, osc_coeffs, reconstruct, term_g)
from .lattice import (GammaPoint, Lattice2, ReducedFrame, coords, correspondence, gamma_of,
                      lattice_of, reduce, sample_geodesic_pushforward, sample_haar)
from .limit_dist import (LimitTermParams, box_sum, cauchy_gap, d_eps, q_term, sample_law)
from .observable import SingularHitError, birkhoff_norm, phi, phi_trunc
from .params import Params, Region
from .rotation import SignedFrac, ResonantSet, in_exclusion, resonant_set, signed_frac
from .stats import ECDF, MCResult, ks, l2_gap, measure_estimate

__version__ = "0.1.0"

__all__ = [
    "ECDF", "GammaPoint", "Lattice2", "LimitCoeffs", "LimitTermParams", "MCResult",
    "OscCoeffs", "Params", "ReducedFrame", "Region", "ResonanceError", "ResonantSet",
    "SignedFrac", "SingularHitError", "backend", "birkhoff_norm", "box_sum", "cauchy_gap",
    "coords", "correspondence", "d_eps", "gamma_of", "in_exclusion", "ks", "l2_gap",
    "lattice_of", "limit_coeffs", "measure_estimate", "model_sum", "osc_coeffs", "phi",
    "phi_trunc", "q_term", "reconstruct", "reduce", "resonant_set", "sample_geodesic_pushforward",
    "sample_haar", "sample_law", "signed_frac", "term_g",
]

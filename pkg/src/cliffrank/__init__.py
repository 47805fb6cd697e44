"""Exact computations with linear series, Shiffer variations, secant loci
and Koszul cohomology on superelliptic curves y^n = f(x)."""

from .exactla import GF, QQ, ExactMatrix, rank, kernel_basis, det, minors
from .curve import (CurveModel, Place, Divisor, FunctionRep, riemann_roch_space,
                    h0, PushforwardTower, tower_h0, tower_h1, new_curve)
from .linser import (LineBundle, canonical_bundle, r_L, cliff_pair, cliff_bundle,
                     cliff_curve, cliff_two_bundle, cliff_two_bundle_min, mult_map,
                     petri_surjective, base_point_free, very_ample, d_pointed_plane_search)

__all__ = [
    "GF", "QQ", "ExactMatrix", "rank", "kernel_basis", "det", "minors",
    "CurveModel", "Place", "Divisor", "FunctionRep", "riemann_roch_space", "h0",
    "PushforwardTower", "tower_h0", "tower_h1", "new_curve",
    "LineBundle", "canonical_bundle", "r_L", "cliff_pair", "cliff_bundle", "cliff_curve",
    "cliff_two_bundle", "cliff_two_bundle_min", "mult_map", "petri_surjective",
    "base_point_free", "very_ample", "d_pointed_plane_search",
]

__version__ = "0.1.0"

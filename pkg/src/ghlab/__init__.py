"""Gromov-Hausdorff distances between finite metric spaces.

Submodules: :mod:`ghlab.metric` (spaces, Hausdorff distance),
:mod:`ghlab.relations` (correspondences and distortion), :mod:`ghlab.gh`
(exact solver and oracle), :mod:`ghlab.topology` (finite topologies and
semicontinuity), :mod:`ghlab.sampling` (nets and experiments).
"""
from .gh import GHResult, gh_bounds, gh_exact, gh_feasible, gh_oracle, geodesic_probe, triangle_audit
from .metric import FiniteMetricSpace, Subset, delta1, diameter, hausdorff, scale, validate
from .relations import ALL, Correspondence, FamilyFilter, Relation, compose, distortion, inverse

__version__ = "0.1.0"

__all__ = [
    "ALL",
    "Correspondence",
    "FamilyFilter",
    "FiniteMetricSpace",
    "GHResult",
    "Relation",
    "Subset",
    "compose",
    "delta1",
    "diameter",
    "distortion",
    "geodesic_probe",
    "gh_bounds",
    "gh_exact",
    "gh_feasible",
    "gh_oracle",
    "hausdorff",
    "inverse",
    "scale",
    "triangle_audit",
    "validate",
]

"""Approximate triangulations of Grassmann manifolds.

Samples point clouds on G_k(R^n) through the projection-matrix embedding,
builds Vietoris-Rips or witness filtrations, computes Z/2 persistent
homology, and locates the parameter windows where the complex carries the
manifold's mod-2 Betti numbers.
"""

__version__ = "0.1.0"

"""Tropical skeletons, contractions and convex/Monge-Ampere calculus for Calabi-Yau hypersurfaces
in projective space."""

__version__ = "0.1.0"

"""Inhomogeneous Diophantine approximation laboratory."""

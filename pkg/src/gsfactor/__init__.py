"""Hermite-spectral operator factorization toolkit."""

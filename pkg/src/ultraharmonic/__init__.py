"""Discrete ultraspherical harmonic analysis toolkit."""

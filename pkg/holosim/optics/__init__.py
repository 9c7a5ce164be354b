"""Gaussian states, linear optics, Wick moments and the truncated Fock oracle."""

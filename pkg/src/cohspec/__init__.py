"""Spectral estimation under signal-plus-noise models with controlled coherence."""

__version__ = "0.1.0"

"""Yoshida lifts from quaternionic theta series, their Fourier coefficients,
and numerical checks of simultaneous nonvanishing of central L-values."""

__version__ = "0.1.0"

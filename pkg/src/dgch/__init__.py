"""Pseudospectral solver and estimate checks for m_t + b u m_x + a m u_x = 0,
m = (1 - L d_xx) u, on a periodic interval."""

__version__ = "0.1.0"

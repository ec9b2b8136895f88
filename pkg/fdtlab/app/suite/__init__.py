"""Verification battery: covariance derivatives, FDT, near-equilibrium, Green–Kubo."""

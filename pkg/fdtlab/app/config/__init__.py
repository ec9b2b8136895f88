"""Layered configuration and the shared tolerance record."""

"""Perturbation families of finite-state jump chains."""

"""Carré du champ Γ(f,g) = L(fg) − fLg − gLf."""

from __future__ import annotations

import numpy as np

from .types import Generator, Observable, Vector, matrix_of, values_of


def carre_du_champ_values(L: "Generator | np.ndarray", f: Vector, g: Vector) -> np.ndarray:
    """Pointwise Σ_y c(x,y)(f(y)−f(x))(g(y)−g(x))."""
    M = matrix_of(L)
    fv, gv = values_of(f), values_of(g)
    off = np.array(M, copy=True)
    np.fill_diagonal(off, 0.0)
    df = fv[None, :] - fv[:, None]
    dg = gv[None, :] - gv[:, None]
    return np.einsum("xy,xy,xy->x", off, df, dg)


def carre_du_champ_matrix(L: "Generator | np.ndarray", f: Vector) -> np.ndarray:
    """Matrix G with G g = Γ(f, g): G(x,y) = c(x,y)(f(y)−f(x)), rows sum to 0."""
    M = matrix_of(L)
    fv = values_of(f)
    G = M * (fv[None, :] - fv[:, None])
    np.fill_diagonal(G, 0.0)
    np.fill_diagonal(G, -G.sum(axis=1))
    return G


def carre_du_champ(L: Generator, f: Observable, g: Observable) -> Observable:
    """Γ(f, g) as an observable; Γ(f, f) ≥ 0 pointwise."""
    return Observable(L.space, carre_du_champ_values(L, f, g))

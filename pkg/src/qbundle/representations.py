"""Dimension counting for SU(n+1) representations and the Veronese embedding."""

from __future__ import annotations

import math

from .line_bundles import monomial_basis, tau_transition
from .projective_atlas import AffinePoint, HomogeneousPoint, to_chart, transition_coords


def section_dim(n: int, l: int) -> int:
    """Dimension of the space of degree-l homogeneous polynomials in n+1 variables."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.comb(n + l, n) if l >= 0 else 0


def su3_dim(p: int, q: int) -> int:
    """Dimension of the SU(3) irrep with Dynkin labels ``(p, q)``."""
    if p < 0 or q < 0:
        raise ValueError("Dynkin labels must be nonnegative")
    return (p + 1) * (q + 1) * (p + q + 2) // 2


def rep_match_search(l: int, p_max: int, q_max: int) -> set[tuple[int, int]]:
    """All ``(p, q)`` in the box whose SU(3) dimension equals ``section_dim(2, l)``."""
    if l < 1:
        raise ValueError("l must be >= 1")
    target = section_dim(2, l)
    return {
        (p, q)
        for p in range(p_max + 1)
        for q in range(q_max + 1)
        if su3_dim(p, q) == target
    }


def veronese_map(Z: HomogeneousPoint, l: int) -> HomogeneousPoint:
    """Degree-l monomials of ``Z`` in the basis order of ``monomial_basis``."""
    if l < 1:
        raise ValueError("l must be >= 1")
    return HomogeneousPoint(monomial_basis(Z.n, l).evaluate(Z.coords))


def pure_power_index(n: int, l: int, j: int) -> int:
    """Index of the monomial ``Z_j^l`` among the Veronese coordinates."""
    exp = [0] * (n + 1)
    exp[j] = l
    return monomial_basis(n, l).index_of(exp)


def veronese_pullback_residual(p: AffinePoint, k: int, l: int) -> float:
    """Compare O(1) on the Veronese image with tau^l on CP^n.

    The image of ``p`` is placed in the image chart of ``Z_j^l`` and the O(1)
    transition to the chart of ``Z_k^l`` is evaluated there; the result must
    equal the tau^l transition from chart j to chart k.
    """
    transition_coords(p, k)  # raises OverlapUndefined off the overlap
    n, j = p.n, p.chart
    W = veronese_map(p.homogeneous(), l)
    alpha = pure_power_index(n, l, j)
    beta = pure_power_index(n, l, k)
    image_point = to_chart(W, alpha)
    pulled = tau_transition(image_point, beta, 1)
    return abs(pulled - tau_transition(p, k, l))


def dimension_table(n_max: int, l_max: int) -> list[list[int]]:
    return [[n, l, section_dim(n, l)] for n in range(1, n_max + 1) for l in range(l_max + 1)]


__all__ = [
    "section_dim",
    "su3_dim",
    "rep_match_search",
    "veronese_map",
    "pure_power_index",
    "veronese_pullback_residual",
    "dimension_table",
]

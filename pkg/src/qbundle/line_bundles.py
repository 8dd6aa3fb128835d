"""Line bundles tau^l on CP^n and their global sections.

Transition convention: ``t_jk(tau) = Z_k / Z_j``. A homogeneous polynomial P of
degree l has local representatives ``f_j = P / Z_j^l`` which satisfy
``f_j = t_jk^l f_k`` on overlaps.
"""

from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass, field

import numpy as np

from .errors import OverlapUndefined
from .projective_atlas import AffinePoint, in_chart, transition_coords


@dataclass(frozen=True)
class PicardClass:
    """Element ``l`` of Pic(CP^n) = Z, labelling the bundle tau^l."""

    l: int

    def __post_init__(self):
        object.__setattr__(self, "l", operator.index(self.l))

    def dual(self) -> "PicardClass":
        return PicardClass(-self.l)


def _as_int(cls) -> int:
    return cls.l if isinstance(cls, PicardClass) else operator.index(cls)


def tau_transition(p: AffinePoint, k: int, cls) -> complex:
    """Transition scalar of tau^l from chart ``p.chart`` to chart ``k`` at ``p``."""
    l = _as_int(cls)
    Z = p.lift()
    if k != p.chart and not in_chart(Z, k):
        raise OverlapUndefined(f"point is not in the overlap of charts {p.chart} and {k}")
    return complex(Z[k] ** l)


def unitary_gauge(t: complex) -> complex:
    """Phase ``t / |t|`` of a transition scalar, for reporting only."""
    return t / abs(t)


@dataclass(frozen=True)
class MonomialBasis:
    """Degree-l monomials in n+1 variables.

    Exponent tuples are sorted in decreasing lexicographic order, so that
    ``Z_0^l`` comes first and ``Z_n^l`` last.
    """

    n: int
    l: int
    exponents: tuple[tuple[int, ...], ...] = field(repr=False)

    def __len__(self):
        return len(self.exponents)

    def index_of(self, exponent) -> int:
        return self.exponents.index(tuple(exponent))

    def evaluate(self, Z) -> np.ndarray:
        """Values of every basis monomial at the homogeneous vector ``Z``."""
        Z = np.asarray(Z, dtype=np.complex128)
        if not self.exponents:
            return np.zeros(0, dtype=np.complex128)
        powers = np.array(self.exponents)
        return np.prod(Z[None, :] ** powers, axis=1)


def monomial_basis(n: int, l: int) -> MonomialBasis:
    if n < 0:
        raise ValueError("n must be >= 0")
    if l < 0:
        return MonomialBasis(n, l, ())
    exps = []
    for combo in itertools.combinations_with_replacement(range(n + 1), l):
        e = [0] * (n + 1)
        for i in combo:
            e[i] += 1
        exps.append(tuple(e))
    return MonomialBasis(n, l, tuple(exps))


@dataclass(frozen=True, eq=False)
class GlobalSection:
    """A homogeneous polynomial, i.e. a global holomorphic section of tau^l."""

    basis: MonomialBasis
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.complex128).reshape(-1)
        if c.size != len(self.basis):
            raise ValueError(
                f"expected {len(self.basis)} coefficients, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_terms(cls, n: int, l: int, terms: dict) -> "GlobalSection":
        """Build from ``{exponent_tuple: coefficient}``."""
        basis = monomial_basis(n, l)
        c = np.zeros(len(basis), dtype=np.complex128)
        for exp, coef in terms.items():
            c[basis.index_of(exp)] = coef
        return cls(basis, c)

    @classmethod
    def random(cls, n: int, l: int, rng: np.random.Generator) -> "GlobalSection":
        basis = monomial_basis(n, l)
        size = len(basis)
        return cls(basis, rng.standard_normal(size) + 1j * rng.standard_normal(size))

    def __call__(self, Z) -> complex:
        return complex(self.coefficients @ self.basis.evaluate(Z))

    def to_json(self) -> dict:
        return {
            "n": self.basis.n,
            "l": self.basis.l,
            "coefficients": [[c.real, c.imag] for c in self.coefficients.tolist()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GlobalSection":
        basis = monomial_basis(int(data["n"]), int(data["l"]))
        coefs = [complex(re, im) for re, im in data["coefficients"]]
        return cls(basis, coefs)


def section_local(s: GlobalSection, p: AffinePoint) -> complex:
    """Local representative ``P(Z) / Z_j^l`` in chart ``j = p.chart``."""
    if s.basis.l < 0:
        raise ValueError("tau^l has no nonzero global sections for l < 0")
    if p.n != s.basis.n:
        raise ValueError("point and section live on different CP^n")
    return s(p.lift())


def section_transition_residual(s: GlobalSection, p: AffinePoint, k: int) -> float:
    """``|f_j(p) - t_jk(tau^l)(p) f_k(p')|`` with ``p'`` the point in chart ``k``."""
    q = transition_coords(p, k)
    t = tau_transition(p, k, s.basis.l)
    return abs(section_local(s, p) - t * section_local(s, q))

"""The bundle QH_l = tau^l (+) T(CP^n) with fibre C^{n+1}.

Fibre coordinates are ordered ``[vacuum, A_1^dagger |0>, ..., A_n^dagger |0>]``.
Transition matrices are block diagonal: the tau^l scalar in entry (0, 0) and
the tangent block in the lower-right n x n corner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WrongDimension
from .line_bundles import PicardClass, _as_int, tau_transition, unitary_gauge
from .projective_atlas import (
    AffinePoint,
    sample_overlap,
    transition_coords,
    transition_jacobian,
)
from .tolerances import TOLERANCES


@dataclass(frozen=True, eq=False)
class FiberState:
    """A vector (or covector, if ``covector``) in the fibre over ``point``."""

    point: AffinePoint
    vacuum: complex
    excitations: np.ndarray
    cls: int = 1
    covector: bool = False

    def __post_init__(self):
        exc = np.array(self.excitations, dtype=np.complex128).reshape(-1)
        if exc.size != self.point.n:
            raise ValueError(f"expected {self.point.n} excitation amplitudes, got {exc.size}")
        exc.setflags(write=False)
        object.__setattr__(self, "excitations", exc)
        object.__setattr__(self, "vacuum", complex(self.vacuum))
        object.__setattr__(self, "cls", _as_int(self.cls))

    @property
    def chart(self) -> int:
        return self.point.chart

    @property
    def n(self) -> int:
        return self.point.n

    def components(self) -> np.ndarray:
        return np.concatenate([[self.vacuum], self.excitations])

    @classmethod
    def from_components(cls, point, components, l, covector=False) -> "FiberState":
        components = np.asarray(components)
        return cls(point, components[0], components[1:], l, covector)

    def pairing(self, other: "FiberState") -> complex:
        """Bilinear pairing ``sum c_i v_i`` (no complex conjugation)."""
        return complex(self.components() @ other.components())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "l": self.cls,
            "chart": self.chart,
            "point": [[c.real, c.imag] for c in self.point.coords.tolist()],
            "vacuum": [self.vacuum.real, self.vacuum.imag],
            "excitations": [[c.real, c.imag] for c in self.excitations.tolist()],
            "covector": self.covector,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiberState":
        point = AffinePoint(int(data["chart"]), [complex(a, b) for a, b in data["point"]])
        if len(point.coords) != int(data["n"]):
            raise ValueError("point dimension does not match n")
        return cls(
            point,
            complex(*data["vacuum"]),
            [complex(a, b) for a, b in data["excitations"]],
            int(data["l"]),
            bool(data.get("covector", False)),
        )


def fiber_frame(chart: int, n: int, cls) -> list[str]:
    """Labels of the fibre basis over ``chart``; always n + 1 of them."""
    if not 0 <= chart <= n:
        raise ValueError(f"chart {chart} out of range 0..{n}")
    l = _as_int(cls)
    return [f"|0({chart})>_{l}"] + [f"A{i}^+({chart})|0({chart})>" for i in range(1, n + 1)]


def assemble_block(scalar: complex, block: np.ndarray) -> np.ndarray:
    """``scalar (+) block`` with exactly zero off-diagonal blocks."""
    m = block.shape[0]
    M = np.zeros((m + 1, m + 1), dtype=np.complex128)
    M[0, 0] = scalar
    M[1:, 1:] = block
    return M


def tangent_block(J: np.ndarray, l: int, cotangent: bool = False) -> np.ndarray:
    """Jacobian for ``l >= 0``, inverse transpose for ``l < 0``.

    ``cotangent=True`` flips the choice, giving the cotangent convention.
    """
    dual = (l < 0) != cotangent
    return np.linalg.inv(J).T if dual else J


@dataclass(frozen=True, eq=False)
class QHTransition:
    from_chart: int
    to_chart: int
    point: AffinePoint
    cls: int
    matrix: np.ndarray = field(repr=False)

    @property
    def scalar(self) -> complex:
        return complex(self.matrix[0, 0])

    @property
    def unitary_scalar(self) -> complex:
        """The vacuum factor as a pure phase (reporting only)."""
        return unitary_gauge(self.scalar)

    @property
    def jacobian_block(self) -> np.ndarray:
        return self.matrix[1:, 1:]


def qh_transition(p: AffinePoint, k: int, cls, cotangent: bool = False) -> QHTransition:
    """Transition matrix of QH_l from chart ``p.chart`` to ``k`` at ``p``."""
    l = _as_int(cls)
    J = transition_jacobian(p, k)
    t = tau_transition(p, k, l)
    return QHTransition(p.chart, k, p, l, assemble_block(t, tangent_block(J, l, cotangent)))


def transport_state(s: FiberState, k: int, cotangent: bool = False) -> FiberState:
    """Express ``s`` in the frame of chart ``k``."""
    T = qh_transition(s.point, k, s.cls, cotangent).matrix
    q = transition_coords(s.point, k)
    return FiberState.from_components(q, T @ s.components(), s.cls, s.covector)


def dual_transport(c: FiberState, k: int, cotangent: bool = False) -> FiberState:
    """Transport a covector by the inverse transpose of the QH_l transition.

    The vacuum entry of the inverse transpose is ``t^{-l}``, i.e. the
    transition of tau^{-l}.
    """
    T = qh_transition(c.point, k, c.cls, cotangent).matrix
    q = transition_coords(c.point, k)
    return FiberState.from_components(q, np.linalg.inv(T).T @ c.components(), c.cls, True)


@dataclass(frozen=True)
class CocycleReport:
    charts: tuple[int, int, int]
    n: int
    cls: int
    samples: int
    seed: int
    max_residual: float
    mean_residual: float
    tolerance: float

    @property
    def pass_(self) -> bool:
        return self.max_residual <= self.tolerance


def cocycle_product(p: AffinePoint, k: int, m: int, cls, transition=qh_transition) -> np.ndarray:
    """``T_mj(p'') T_km(p') T_jk(p)`` with the base point carried along."""
    j = p.chart
    T1 = transition(p, k, cls).matrix
    p1 = transition_coords(p, k)
    T2 = transition(p1, m, cls).matrix
    p2 = transition_coords(p1, m)
    T3 = transition(p2, j, cls).matrix
    return T3 @ T2 @ T1


def cocycle_residual(
    n: int, j: int, k: int, m: int, cls, samples: int = 50, seed: int = 0
) -> CocycleReport:
    """Max spectral-norm deviation of the triple product from the identity.

    Chart indices may repeat; for CP^1 ``(0, 1, 0)`` checks the round trip.
    """
    l = _as_int(cls)
    points = sample_overlap(n, j, k, samples, seed)
    I = np.eye(n + 1)
    res = np.array(
        [np.linalg.norm(cocycle_product(p, k, m, l) - I, ord=2) for p in points]
    )
    return CocycleReport(
        (j, k, m), n, l, samples, seed, float(res.max()), float(res.mean()),
        TOLERANCES["qh_cocycle"],
    )


def su2_selfduality_check(p: AffinePoint, cls) -> float:
    """``||T - T^T||`` for the 2 x 2 transition of QH_l over CP^1."""
    if p.n != 1:
        raise WrongDimension(f"self-duality check needs CP^1, got CP^{p.n}")
    T = qh_transition(p, 1 - p.chart, cls).matrix
    return float(np.linalg.norm(T - T.T))


__all__ = [
    "FiberState",
    "PicardClass",
    "QHTransition",
    "CocycleReport",
    "fiber_frame",
    "assemble_block",
    "tangent_block",
    "qh_transition",
    "transport_state",
    "dual_transport",
    "cocycle_product",
    "cocycle_residual",
    "su2_selfduality_check",
]

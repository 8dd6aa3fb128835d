"""Standard affine atlas on CP^n.

Charts are zero-based: chart ``j`` is the open set ``Z_j != 0`` with affine
coordinates ``z_i = Z_i / Z_j`` for ambient ``i != j``, listed in ambient order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartUndefined, OverlapUndefined
from .tolerances import R_MAX, R_MIN, TOLERANCES


def _frozen_complex(values) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HomogeneousPoint:
    """A point of CP^n given by n+1 homogeneous coordinates (not normalized)."""

    coords: np.ndarray

    def __post_init__(self):
        coords = _frozen_complex(self.coords)
        if coords.size < 2:
            raise ValueError("need at least two homogeneous coordinates")
        if not np.all(np.isfinite(coords)) or not np.any(np.abs(coords) > 0):
            raise ValueError("homogeneous coordinates must be finite and not all zero")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.size - 1

    def normalized(self) -> np.ndarray:
        return self.coords / np.linalg.norm(self.coords)

    def equivalent(self, other: "HomogeneousPoint", tol: float = 1e-12) -> bool:
        """True iff the two coordinate vectors are proportional.

        Uses the 2x2 minors ``u_a v_b - u_b v_a`` of the unit-normalized vectors,
        which all vanish exactly when the vectors span the same line.
        """
        if other.n != self.n:
            return False
        u, v = self.normalized(), other.normalized()
        minors = np.outer(u, v) - np.outer(v, u)
        return bool(np.max(np.abs(minors)) <= tol)


@dataclass(frozen=True, eq=False)
class AffinePoint:
    """A point in the affine chart ``chart`` with ``n`` complex coordinates."""

    chart: int
    coords: np.ndarray

    def __post_init__(self):
        coords = _frozen_complex(self.coords)
        if not np.all(np.isfinite(coords)):
            raise ValueError("affine coordinates must be finite")
        if self.chart < 0:
            raise ValueError(f"chart index must be nonnegative, got {self.chart}")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "chart", int(self.chart))

    @property
    def n(self) -> int:
        return self.coords.size

    def lift(self) -> np.ndarray:
        """Homogeneous coordinates with a 1 inserted at the chart index."""
        _check_chart(self.chart, self.n)
        return np.insert(self.coords, self.chart, 1.0 + 0j)

    def homogeneous(self) -> HomogeneousPoint:
        return HomogeneousPoint(self.lift())

    def allclose(self, other: "AffinePoint", atol: float = 1e-12) -> bool:
        return (
            self.chart == other.chart
            and self.n == other.n
            and bool(np.max(np.abs(self.coords - other.coords), initial=0.0) <= atol)
        )

    def __repr__(self):
        return f"AffinePoint(chart={self.chart}, coords={self.coords.tolist()})"


def _check_chart(j: int, n: int):
    if not 0 <= j <= n:
        raise ValueError(f"chart index {j} out of range 0..{n}")


def to_chart(Z: HomogeneousPoint, j: int) -> AffinePoint:
    """Project ``Z`` into chart ``j``.

    Raises ChartUndefined when ``|Z_j|`` of the unit-normalized vector is at
    or below the chart tolerance.
    """
    _check_chart(j, Z.n)
    if abs(Z.normalized()[j]) <= TOLERANCES["chart"]:
        raise ChartUndefined(f"Z_{j} vanishes; point is outside chart {j}")
    raw = Z.coords
    return AffinePoint(j, np.delete(raw, j) / raw[j])


def in_chart(Z: np.ndarray, k: int) -> bool:
    Z = np.asarray(Z)
    return bool(abs(Z[k]) / np.linalg.norm(Z) > TOLERANCES["chart"])


def transition_coords(p: AffinePoint, k: int) -> AffinePoint:
    """Re-express ``p`` in chart ``k``."""
    _check_chart(k, p.n)
    if k == p.chart:
        return p
    Z = p.lift()
    if not in_chart(Z, k):
        raise OverlapUndefined(f"point is not in the overlap of charts {p.chart} and {k}")
    return AffinePoint(k, np.delete(Z, k) / Z[k])


def transition_jacobian(p: AffinePoint, k: int) -> np.ndarray:
    """Holomorphic Jacobian of the chart change ``p.chart -> k`` at ``p``.

    Rows index the target coordinates (ambient order without ``k``), columns
    the source coordinates (ambient order without ``p.chart``). With
    ``w_a = Z_a / Z_k`` and ``Z_j = 1``::

        dw_a / dz_b = (delta_ab - w_a delta_kb) / Z_k
    """
    _check_chart(k, p.n)
    n, j = p.n, p.chart
    if k == j:
        return np.eye(n, dtype=np.complex128)
    Z = p.lift()
    if not in_chart(Z, k):
        raise OverlapUndefined(f"point is not in the overlap of charts {j} and {k}")
    rows = [a for a in range(n + 1) if a != k]
    cols = [b for b in range(n + 1) if b != j]
    w = np.delete(Z, k) / Z[k]
    J = (np.array(rows)[:, None] == np.array(cols)[None, :]).astype(np.complex128)
    J[:, cols.index(k)] -= w
    return J / Z[k]


def _random_coords(rng: np.random.Generator, shape) -> np.ndarray:
    # log-uniform modulus in [R_MIN, R_MAX], uniform phase
    radius = np.exp(rng.uniform(np.log(R_MIN), np.log(R_MAX), size=shape))
    phase = rng.uniform(0.0, 2 * np.pi, size=shape)
    return radius * np.exp(1j * phase)


def sample_overlap(n: int, j: int, k: int, count: int, seed: int) -> list[AffinePoint]:
    """Deterministic sample of points in chart ``j`` that also lie in chart ``k``.

    All affine coordinates have modulus in ``[R_MIN, R_MAX]``, so the samples
    in fact lie in every chart of CP^n and can be used for triple overlaps.
    """
    _check_chart(j, n)
    _check_chart(k, n)
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    coords = _random_coords(rng, (count, n))
    return [AffinePoint(j, row) for row in coords]


def sample_cpn(n: int, count: int, seed: int) -> list[AffinePoint]:
    """Points distributed by the Fubini-Study measure, each in its best chart.

    A standard complex Gaussian vector in C^{n+1} projects to the unitarily
    invariant measure on CP^n. Each point is expressed in the chart of its
    largest homogeneous coordinate, so every affine coordinate has ``|z_i| <= 1``.
    """
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((count, n + 1)) + 1j * rng.standard_normal((count, n + 1))
    return [to_chart(HomogeneousPoint(row), int(np.argmax(np.abs(row)))) for row in Z]

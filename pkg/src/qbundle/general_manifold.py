"""QH bundles over a compact complex manifold given by a finite atlas.

An ``AtlasSpec`` bundles the chart data (domains, coordinate changes,
Jacobians, a sampler for overlaps) with optional Hermitian geometry and
line-bundle data. ``cpn_atlas`` and ``torus_atlas`` build the two shipped
instances: CP^n with Fubini-Study geometry and tau^l, and the flat torus
C / (Z + modulus Z) with the trivial line bundle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import finite_diff, hermitian_geometry as hg
from .errors import InvalidAtlas, InvalidModulus, OverlapUndefined
from .line_bundles import _as_int, tau_transition
from .projective_atlas import (
    AffinePoint,
    sample_cpn,
    sample_overlap,
    transition_coords,
    transition_jacobian,
)
from .quantum_bundle import (
    FiberState,
    QHTransition,
    assemble_block,
    tangent_block,
)
from .tolerances import TOLERANCES


@dataclass(frozen=True, eq=False)
class LineData:
    """Transition scalars and (optionally) Hermitian geometry of a line bundle.

    ``transition(p, k)`` maps the fibre coordinate in chart ``p.chart`` to chart
    ``k``; ``connection(chart, z)`` returns the coefficients ``A_i`` of the
    connection form and ``curvature(chart, z)`` the matrix ``F_{i jbar}``.
    """

    label: str
    transition: Callable[[AffinePoint, int], complex]
    connection: Callable[[int, np.ndarray], np.ndarray] | None = None
    curvature: Callable[[int, np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True, eq=False)
class AtlasSpec:
    name: str
    n: int
    r: int
    contains: Callable[[int, np.ndarray], bool]
    overlap: Callable[[AffinePoint, int], bool]
    transition: Callable[[AffinePoint, int], AffinePoint]
    jacobian: Callable[[AffinePoint, int], np.ndarray]
    sampler: Callable[[int, int, int, int], list[AffinePoint]]
    line: Callable[[int], LineData] | None = None
    kahler_potential: Callable[[int, np.ndarray], float] | None = None
    metric: Callable[[int, np.ndarray], np.ndarray] | None = None
    connection: Callable[[int, np.ndarray], np.ndarray] | None = None
    curvature: Callable[[int, np.ndarray], np.ndarray] | None = None
    loop_centers: Callable[[int, int], list[AffinePoint]] | None = None
    loop_radius: float = 0.5
    params: dict = field(default_factory=dict)

    def line_data(self, cls) -> LineData:
        if self.line is None:
            raise InvalidAtlas(f"{self.name}: no line-bundle data supplied")
        return self.line(_as_int(cls))

    def with_line(self, line: Callable[[int], LineData]) -> "AtlasSpec":
        return replace(self, line=line)

    def to_json(self) -> dict:
        return {"type": self.name, **self.params}


# --------------------------------------------------------------------------
# validation


def _triple_points(atlas: AtlasSpec, j: int, k: int, m: int, count: int, seed: int):
    pts = atlas.sampler(j, k, count, seed)
    out = []
    for p in pts:
        q = atlas.transition(p, k)
        if atlas.overlap(q, m) and atlas.overlap(p, m):
            out.append(p)
    return out


def validate_atlas(atlas: AtlasSpec, samples: int = 10, seed: int = 0) -> None:
    """Check the atlas invariants on sampled points; raise InvalidAtlas on failure."""
    tol = TOLERANCES
    if atlas.r < 2:
        raise InvalidAtlas(f"{atlas.name}: r >= 2 violated (r = {atlas.r})")
    for j, k in itertools.product(range(atlas.r), repeat=2):
        for p in atlas.sampler(j, k, samples, seed):
            if not atlas.overlap(p, k):
                raise InvalidAtlas(f"{atlas.name}: sampler returned a point outside charts {j},{k}")
            q = atlas.transition(p, k)
            back = atlas.transition(q, j)
            if not back.allclose(p, tol["roundtrip"]):
                raise InvalidAtlas(f"{atlas.name}: transition round trip violated for {j}->{k}")
            J = atlas.jacobian(p, k)
            fd = finite_diff.holomorphic_jacobian(
                lambda w: atlas.transition(AffinePoint(j, w), k).coords, p.coords
            )
            if finite_diff.relative_error(J, fd) > tol["fd_jacobian"]:
                raise InvalidAtlas(
                    f"{atlas.name}: Jacobian {j}->{k} disagrees with finite differences"
                )
            if atlas.metric is not None and atlas.kahler_potential is not None:
                g = atlas.metric(j, p.coords)
                H = finite_diff.mixed_hessian(lambda w: atlas.kahler_potential(j, w), p.coords)
                if finite_diff.relative_error(H, g) > tol["fd_metric"]:
                    raise InvalidAtlas(f"{atlas.name}: metric is not the Hessian of the potential")


def validate_line(atlas: AtlasSpec, cls, samples: int = 10, seed: int = 0) -> None:
    """Cocycle condition for the line transitions on sampled triple overlaps."""
    line = atlas.line_data(cls)
    for j, k, m in itertools.product(range(atlas.r), repeat=3):
        for p in _triple_points(atlas, j, k, m, samples, seed):
            q = atlas.transition(p, k)
            r = atlas.transition(q, m)
            prod = line.transition(p, k) * line.transition(q, m) * line.transition(r, j)
            if abs(prod - 1) > TOLERANCES["line_cocycle"]:
                raise InvalidAtlas(
                    f"{atlas.name}: line transitions of {line.label} violate the cocycle "
                    f"condition on ({j},{k},{m})"
                )


# --------------------------------------------------------------------------
# the generic QH bundle


@dataclass(frozen=True, eq=False)
class QHBundle:
    atlas: AtlasSpec
    cls: int
    cotangent: bool = False

    @property
    def line(self) -> LineData:
        return self.atlas.line_data(self.cls)

    def qh_transition(self, p: AffinePoint, k: int) -> QHTransition:
        if not self.atlas.overlap(p, k):
            raise OverlapUndefined(f"point not in overlap of charts {p.chart} and {k}")
        J = self.atlas.jacobian(p, k)
        t = self.line.transition(p, k)
        M = assemble_block(t, tangent_block(J, self.cls, self.cotangent))
        return QHTransition(p.chart, k, p, self.cls, M)

    def transport_state(self, s: FiberState, k: int) -> FiberState:
        T = self.qh_transition(s.point, k).matrix
        q = self.atlas.transition(s.point, k)
        return FiberState.from_components(q, T @ s.components(), s.cls, s.covector)

    def cocycle_residual(self, j: int, k: int, m: int, samples: int = 50, seed: int = 0):
        """``(max, mean, count)`` of ``||T_mj T_km T_jk - I||`` over triple-overlap samples."""
        I = np.eye(self.atlas.n + 1)
        res = []
        for p in _triple_points(self.atlas, j, k, m, samples, seed):
            T1 = self.qh_transition(p, k).matrix
            q = self.atlas.transition(p, k)
            T2 = self.qh_transition(q, m).matrix
            r = self.atlas.transition(q, m)
            T3 = self.qh_transition(r, j).matrix
            res.append(np.linalg.norm(T3 @ T2 @ T1 - I, ord=2))
        if not res:
            return 0.0, 0.0, 0
        return float(np.max(res)), float(np.mean(res)), len(res)


def build_qh_bundle(atlas: AtlasSpec, cls, validate: bool = True, cotangent: bool = False):
    if validate:
        validate_atlas(atlas)
        validate_line(atlas, cls)
    return QHBundle(atlas, _as_int(cls), cotangent)


# --------------------------------------------------------------------------
# CP^n


def _cpn_line(l: int) -> LineData:
    return LineData(
        f"tau^{l}",
        lambda p, k: tau_transition(p, k, l),
        lambda chart, z: hg.line_connection(z, l),
        lambda chart, z: hg.curvature_line(z, l),
    )


def cpn_atlas(n: int) -> AtlasSpec:
    if n < 1:
        raise InvalidAtlas("CP^n needs n >= 1")

    def overlap(p, k):
        try:
            transition_coords(p, k)
        except OverlapUndefined:
            return False
        return True

    return AtlasSpec(
        name="cpn",
        n=n,
        r=n + 1,
        contains=lambda chart, z: hg._cpn_contains(np.asarray(z)),
        overlap=overlap,
        transition=transition_coords,
        jacobian=transition_jacobian,
        sampler=lambda j, k, count, seed: sample_overlap(n, j, k, count, seed),
        line=_cpn_line,
        kahler_potential=lambda chart, z: hg.kahler_potential(z),
        metric=lambda chart, z: hg.fs_metric(z).g,
        connection=lambda chart, z: hg.chern_connection(z),
        curvature=lambda chart, z: hg.curvature_tangent(z),
        loop_centers=lambda count, seed: sample_cpn(n, count, seed),
        loop_radius=0.5,
        params={"n": n},
    )


# --------------------------------------------------------------------------
# complex torus


_TORUS_CENTERS = ((0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5))
_TORUS_HALF_WIDTH = 0.3


def _trivial_line(l: int) -> LineData:
    if l != 0:
        raise InvalidAtlas(
            "the torus atlas only ships the trivial line bundle; supply LineData via with_line"
        )
    return LineData(
        "trivial",
        lambda p, k: 1.0 + 0j,
        lambda chart, z: np.zeros(1, dtype=complex),
        lambda chart, z: np.zeros((1, 1), dtype=complex),
    )


def torus_atlas(modulus: complex) -> AtlasSpec:
    """Four parallelogram charts covering C / (Z + modulus Z).

    Chart ``a`` is ``{c_a + s + t * modulus : |s|, |t| < 0.3}`` in lattice units
    with ``(s_a, t_a)`` in ``{0, 0.5}^2``. Transitions are lattice translations.
    The potential ``K = pi |z|^2 / Im(modulus)`` gives a constant metric whose
    Kahler form has total volume 1.
    """
    tau = complex(modulus)
    if not tau.imag > 0:
        raise InvalidModulus(f"modulus must have positive imaginary part, got {modulus}")
    hw = _TORUS_HALF_WIDTH

    def lattice(z: complex) -> tuple[float, float]:
        t = z.imag / tau.imag
        return z.real - t * tau.real, t

    def offsets(z: complex, k: int, margin: float = 0.0):
        s, t = lattice(z)
        sk, tk = _TORUS_CENTERS[k]
        m1, m2 = round(sk - s), round(tk - t)
        ok = abs(s + m1 - sk) < hw - margin and abs(t + m2 - tk) < hw - margin
        return ok, m1, m2

    def contains(chart, z):
        s, t = lattice(complex(np.asarray(z).reshape(-1)[0]))
        sc, tc = _TORUS_CENTERS[chart]
        return abs(s - sc) < hw and abs(t - tc) < hw

    def overlap(p, k):
        return contains(p.chart, p.coords) and offsets(complex(p.coords[0]), k)[0]

    def transition(p, k):
        if k == p.chart:
            return p
        ok, m1, m2 = offsets(complex(p.coords[0]), k)
        if not ok or not contains(p.chart, p.coords):
            raise OverlapUndefined(f"point not in overlap of torus charts {p.chart} and {k}")
        return AffinePoint(k, [p.coords[0] + m1 + m2 * tau])

    def jacobian(p, k):
        if not overlap(p, k):
            raise OverlapUndefined(f"point not in overlap of torus charts {p.chart} and {k}")
        return np.eye(1, dtype=complex)

    def sampler(j, k, count, seed):
        rng = np.random.default_rng(seed)
        sj, tj = _TORUS_CENTERS[j]
        margin = 0.01
        out = []
        while len(out) < count:
            s = rng.uniform(sj - hw + margin, sj + hw - margin, size=4 * count)
            t = rng.uniform(tj - hw + margin, tj + hw - margin, size=4 * count)
            for z in s + t * tau:
                if offsets(z, k, margin)[0]:
                    out.append(AffinePoint(j, [z]))
                    if len(out) == count:
                        break
        return out

    inradius = hw * tau.imag * min(1.0, 1.0 / abs(tau))

    def loop_centers(count, seed):
        rng = np.random.default_rng(seed)
        pts = []
        for i in range(count):
            a = i % 4
            sc, tc = _TORUS_CENTERS[a]
            jitter = 0.1 * inradius * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
            pts.append(AffinePoint(a, [sc + tc * tau + jitter]))
        return pts

    weight = math.pi / tau.imag
    return AtlasSpec(
        name="torus",
        n=1,
        r=4,
        contains=contains,
        overlap=overlap,
        transition=transition,
        jacobian=jacobian,
        sampler=sampler,
        line=_trivial_line,
        kahler_potential=lambda chart, z: weight * float(np.vdot(z, z).real),
        metric=lambda chart, z: np.full((1, 1), weight, dtype=complex),
        connection=lambda chart, z: np.zeros((1, 1, 1), dtype=complex),
        curvature=lambda chart, z: np.zeros((1, 1, 1, 1), dtype=complex),
        loop_centers=loop_centers,
        loop_radius=0.5 * inradius,
        params={"modulus": [tau.real, tau.imag]},
    )


def atlas_from_json(data: dict) -> AtlasSpec:
    """``{"type": "torus", "modulus": [re, im]}`` or ``{"type": "cpn", "n": n}``."""
    kind = data.get("type")
    if kind == "torus":
        re, im = data["modulus"]
        return torus_atlas(complex(re, im))
    if kind == "cpn":
        return cpn_atlas(int(data["n"]))
    raise InvalidAtlas(f"unknown atlas type {kind!r}")


# --------------------------------------------------------------------------
# flatness


@dataclass(frozen=True)
class FlatnessReport:
    manifold: str
    cls: int
    tangent_flat: bool
    line_flat: bool
    max_tangent_curvature: float
    max_tangent_holonomy: float
    max_line_curvature: float
    max_line_holonomy: float
    samples: int
    loops: int

    @property
    def qh_flat(self) -> bool:
        return self.tangent_flat and self.line_flat

    def to_json(self) -> dict:
        return {
            "manifold": self.manifold,
            "l": self.cls,
            "tangent_flat": self.tangent_flat,
            "line_flat": self.line_flat,
            "qh_flat": self.qh_flat,
            "evidence": {
                "max_tangent_curvature": self.max_tangent_curvature,
                "max_tangent_holonomy": self.max_tangent_holonomy,
                "max_line_curvature": self.max_line_curvature,
                "max_line_holonomy": self.max_line_holonomy,
            },
            "samples": self.samples,
            "loops": self.loops,
        }


def _holonomy_deviation(atlas: AtlasSpec, center: AffinePoint, conn, steps: int) -> float:
    loop = hg.Loop(center.coords, atlas.loop_radius, chart=center.chart)
    V, _ = hg.transport(
        conn, loop, steps, contains=lambda z: atlas.contains(center.chart, z)
    )
    return float(np.linalg.norm(V - np.eye(V.shape[0]), ord=2))


def flatness_report(
    atlas: AtlasSpec,
    cls,
    samples: int = 20,
    seed: int = 0,
    loops: int = 2,
    steps: int = 400,
) -> FlatnessReport:
    """Decide flatness of T, of the line bundle, and of their sum from sampled evidence."""
    if atlas.curvature is None or atlas.connection is None:
        raise InvalidAtlas(f"{atlas.name}: flatness needs connection and curvature data")
    if atlas.loop_centers is None:
        raise InvalidAtlas(f"{atlas.name}: flatness needs loop centers")
    l = _as_int(cls)
    line = atlas.line_data(l)
    if line.curvature is None or line.connection is None:
        raise InvalidAtlas(f"{atlas.name}: line bundle {line.label} has no connection data")
    tol = TOLERANCES["flat"]

    points = atlas.loop_centers(samples, seed)
    t_curv = max(float(np.linalg.norm(atlas.curvature(p.chart, p.coords))) for p in points)
    l_curv = max(float(np.linalg.norm(line.curvature(p.chart, p.coords))) for p in points)

    t_hol = l_hol = 0.0
    for p in points[:loops]:
        chart = p.chart

        def tconn(z, dz, chart=chart):
            return np.einsum("ijk,k->ij", atlas.connection(chart, z), dz)

        def lconn(z, dz, chart=chart):
            return np.array([[line.connection(chart, z) @ dz]])

        t_hol = max(t_hol, _holonomy_deviation(atlas, p, tconn, steps))
        l_hol = max(l_hol, _holonomy_deviation(atlas, p, lconn, steps))

    return FlatnessReport(
        manifold=atlas.name,
        cls=l,
        tangent_flat=t_curv <= tol and t_hol <= tol,
        line_flat=l_curv <= tol and l_hol <= tol,
        max_tangent_curvature=t_curv,
        max_tangent_holonomy=t_hol,
        max_line_curvature=l_curv,
        max_line_holonomy=l_hol,
        samples=samples,
        loops=min(loops, len(points)),
    )

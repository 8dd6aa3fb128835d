"""Fubini-Study geometry on an affine chart of CP^n.

Conventions (holomorphic frame, ``S = 1 + |z|^2``)::

    K             = log S
    g_{i jbar}    = d_i d_jbar K
    Gamma^i_{jk}  = g^{i lbar} d_j g_{k lbar}
    R^i_{j k lbar} = -d_lbar Gamma^i_{jk}
    omega         = (i / 2 pi) g_{i jbar} dz_i ^ dzbar_j

The line bundle tau^l carries the Hermitian metric ``h = S^{-l}``, with
connection form ``A = d log h = -l dK`` and curvature ``F = dbar A = l g``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import LoopLeavesChart
from .line_bundles import _as_int
from .projective_atlas import AffinePoint
from .tolerances import TOLERANCES


def _coords(p) -> np.ndarray:
    if isinstance(p, AffinePoint):
        return p.coords
    return np.asarray(p, dtype=np.complex128).reshape(-1)


def kahler_potential(p) -> float:
    z = _coords(p)
    return float(np.log1p(np.vdot(z, z).real))


@dataclass(frozen=True, eq=False)
class MetricAtPoint:
    point: AffinePoint
    g: np.ndarray

    def is_hermitian(self, tol: float = 1e-13) -> bool:
        return bool(np.max(np.abs(self.g - self.g.conj().T)) <= tol)

    def is_positive_definite(self) -> bool:
        return bool(np.all(np.linalg.eigvalsh(0.5 * (self.g + self.g.conj().T)) > 0))


def _metric_array(z: np.ndarray) -> np.ndarray:
    S = 1.0 + np.vdot(z, z).real
    return np.eye(z.size) / S - np.outer(z.conj(), z) / S**2


def fs_metric(p) -> MetricAtPoint:
    """Fubini-Study metric ``g[i, j] = g_{i jbar}`` at ``p``."""
    z = _coords(p)
    point = p if isinstance(p, AffinePoint) else AffinePoint(0, z)
    return MetricAtPoint(point, _metric_array(z))


def metric_derivative(p) -> np.ndarray:
    """``dg[j, k, l] = d_j g_{k lbar}`` (holomorphic derivative)."""
    z = _coords(p)
    n = z.size
    S = 1.0 + np.vdot(z, z).real
    zb = z.conj()
    eye = np.eye(n)
    # g_{k lbar} = delta_kl / S - zbar_k z_l / S^2
    return (
        -np.einsum("kl,j->jkl", eye, zb) / S**2
        - np.einsum("jl,k->jkl", eye, zb) / S**2
        + 2 * np.einsum("k,l,j->jkl", zb, z, zb) / S**3
    )


def inverse_metric(g: np.ndarray) -> np.ndarray:
    """``ginv[i, l] = g^{i lbar}``, so that ``sum_l ginv[i, l] g[k, l] = delta_ik``."""
    return np.linalg.inv(g).T


def chern_connection(p) -> np.ndarray:
    """Connection coefficients ``Gamma[i, j, k] = Gamma^i_{jk}``."""
    z = _coords(p)
    ginv = inverse_metric(_metric_array(z))
    return np.einsum("il,jkl->ijk", ginv, metric_derivative(z))


def curvature_tangent(p) -> np.ndarray:
    """Curvature ``R[i, j, k, l] = R^i_{j k lbar}`` of the tangent bundle.

    Closed form of ``-d_lbar Gamma^i_{jk}`` for Fubini-Study, where
    ``Gamma^i_{jk} = -(delta_ij zbar_k + delta_ik zbar_j) / S``.
    """
    z = _coords(p)
    n = z.size
    S = 1.0 + np.vdot(z, z).real
    zb = z.conj()
    eye = np.eye(n)
    delta = np.einsum("ij,kl->ijkl", eye, eye) + np.einsum("ik,jl->ijkl", eye, eye)
    twist = np.einsum("ij,k,l->ijkl", eye, zb, z) + np.einsum("ik,j,l->ijkl", eye, zb, z)
    return delta / S - twist / S**2


def invariant_curvature_norm(p) -> float:
    """Norm of R with all indices contracted by the metric (chart independent)."""
    z = _coords(p)
    g = _metric_array(z)
    ginv = inverse_metric(g)
    R = curvature_tangent(z)
    # each holomorphic slot of R pairs with the matching antiholomorphic slot of conj(R)
    sq = np.einsum("ijkl,abcd,ia,jb,kc,dl->", R, R.conj(), g, ginv, ginv, ginv)
    return float(np.sqrt(sq.real))


def line_connection(p, cls) -> np.ndarray:
    """Connection form coefficients ``A[i]`` of tau^l, ``A = sum A_i dz_i``."""
    l = _as_int(cls)
    z = _coords(p)
    S = 1.0 + np.vdot(z, z).real
    return -l * z.conj() / S


def curvature_line(p, cls) -> np.ndarray:
    """``F[i, j] = F_{i jbar} = -d_jbar A_i`` for tau^l."""
    l = _as_int(cls)
    z = _coords(p)
    S = 1.0 + np.vdot(z, z).real
    # -d_jbar A_i at l = 1:  d_jbar (zbar_i / S)
    unit = np.eye(z.size) / S - np.outer(z.conj(), z) / S**2
    return l * unit


@dataclass(frozen=True, eq=False)
class CurvatureAtPoint:
    point: AffinePoint
    tangent_curvature: np.ndarray
    line_curvature: np.ndarray
    cls: int


def curvature_at(p: AffinePoint, cls) -> CurvatureAtPoint:
    return CurvatureAtPoint(p, curvature_tangent(p), curvature_line(p, cls), _as_int(cls))


def kahler_form(p) -> np.ndarray:
    """Coefficients ``omega[i, j]`` of ``omega = sum omega_{i jbar} dz_i ^ dzbar_j``.

    Evaluated from the potential: ``d_i d_jbar log S`` times ``i / 2 pi``.
    """
    z = _coords(p)
    S = 1.0 + np.vdot(z, z).real
    hess = (S * np.eye(z.size) - np.outer(z.conj(), z)) / (S * S)
    return (1j / (2 * math.pi)) * hess


def prequantization_residual(p) -> float:
    """Norm of ``F(tau) + 2 pi i omega`` as coefficient matrices of dz ^ dzbar."""
    return float(np.linalg.norm(curvature_line(p, 1) - (-2j * math.pi) * kahler_form(p)))


# --------------------------------------------------------------------------
# parallel transport


@dataclass(frozen=True)
class Loop:
    """Circle ``center + radius * exp(2 pi i s(t)) * direction`` in one chart.

    ``s(t) = t + warp * sin(2 pi t) / (2 pi)`` gives a reparameterization of the
    same circle for ``|warp| < 1``.
    """

    center: tuple
    radius: float
    direction: tuple = None
    chart: int = 0
    warp: float = 0.0

    def __post_init__(self):
        c = tuple(complex(x) for x in np.atleast_1d(self.center))
        object.__setattr__(self, "center", c)
        if self.direction is None:
            d = np.eye(len(c), dtype=complex)[0]
        else:
            d = np.asarray(self.direction, dtype=complex).reshape(-1)
        if d.size != len(c):
            raise ValueError("direction and center must have the same dimension")
        d = d / np.linalg.norm(d)
        object.__setattr__(self, "direction", tuple(complex(x) for x in d))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if abs(self.warp) >= 1:
            raise ValueError("|warp| must be < 1 for a valid reparameterization")

    def point(self, t: float) -> np.ndarray:
        s = t + self.warp * math.sin(2 * math.pi * t) / (2 * math.pi)
        return np.array(self.center) + self.radius * np.exp(2j * math.pi * s) * np.array(
            self.direction
        )

    def velocity(self, t: float) -> np.ndarray:
        s = t + self.warp * math.sin(2 * math.pi * t) / (2 * math.pi)
        ds = 1 + self.warp * math.cos(2 * math.pi * t)
        return (
            2j * math.pi * ds * self.radius * np.exp(2j * math.pi * s) * np.array(self.direction)
        )

    def to_json(self) -> dict:
        return {
            "center": [[c.real, c.imag] for c in self.center],
            "radius": self.radius,
            "direction": [[c.real, c.imag] for c in self.direction],
            "chart": self.chart,
            "warp": self.warp,
        }


def _cpn_contains(z: np.ndarray) -> bool:
    if not np.all(np.isfinite(z)):
        return False
    return 1.0 / math.sqrt(1.0 + np.vdot(z, z).real) > TOLERANCES["chart"]


def tangent_connection_matrix(z, dz) -> np.ndarray:
    """``C[i, j] = Gamma^i_{jk} dz^k``."""
    return np.einsum("ijk,k->ij", chern_connection(z), dz)


def line_connection_matrix(z, dz, cls) -> np.ndarray:
    return np.array([[line_connection(z, cls) @ dz]])


def qh_connection_matrix(z, dz, cls) -> np.ndarray:
    """Block-diagonal connection on tau^l (+) T, vacuum first.

    For ``l < 0`` the excitation block carries the dual connection ``-C^T``,
    matching the inverse-transpose transition functions.
    """
    l = _as_int(cls)
    n = len(z)
    C = np.zeros((n + 1, n + 1), dtype=complex)
    C[0, 0] = line_connection(z, l) @ dz
    T = tangent_connection_matrix(z, dz)
    C[1:, 1:] = -T.T if l < 0 else T
    return C


def transport(
    connection: Callable[[np.ndarray, np.ndarray], np.ndarray],
    loop: Loop,
    steps: int,
    contains: Callable[[np.ndarray], bool] = _cpn_contains,
    record: bool = False,
):
    """Integrate ``V' = -C(gamma, gamma') V`` over t in [0, 1] with classical RK4.

    Returns ``(V, trajectory)``; the trajectory is ``None`` unless ``record``.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    h = 1.0 / steps
    z0 = loop.point(0.0)
    m = connection(z0, loop.velocity(0.0)).shape[0]
    V = np.eye(m, dtype=complex)

    def rhs(t, V):
        z = loop.point(t)
        if not contains(z):
            raise LoopLeavesChart(f"loop point {z.tolist()} is outside chart {loop.chart}")
        return -connection(z, loop.velocity(t)) @ V

    traj = [(0.0, V.copy())] if record else None
    for step in range(steps):
        t = step * h
        k1 = rhs(t, V)
        k2 = rhs(t + h / 2, V + h / 2 * k1)
        k3 = rhs(t + h / 2, V + h / 2 * k2)
        k4 = rhs(t + h, V + h * k3)
        V = V + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if record:
            traj.append(((step + 1) * h, V.copy()))
    return V, traj


def _unwrapped_phase(traj, rows: slice) -> float:
    dets = np.array([np.linalg.det(V[rows, rows]) for _, V in traj])
    phases = np.unwrap(np.angle(dets))
    return float(phases[-1] - phases[0])


BundleKind = Literal["tangent", "line", "qh"]


@dataclass(frozen=True, eq=False)
class HolonomyResult:
    bundle: str
    cls: int
    loop: Loop
    steps: int
    matrix: np.ndarray
    deviation_from_identity: float
    block_phases: tuple[float, ...]
    trajectory: list | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "bundle": self.bundle,
            "l": self.cls,
            "loop": self.loop.to_json(),
            "steps": self.steps,
            "matrix": [[[v.real, v.imag] for v in row] for row in self.matrix.tolist()],
            "deviation_from_identity": self.deviation_from_identity,
            "block_phases": list(self.block_phases),
        }

    def trajectory_rows(self):
        """Rows ``(t, Re V_00, Im V_00, Re V_01, ...)`` for CSV export."""
        for t, V in self.trajectory or []:
            flat = V.reshape(-1)
            row = [t]
            for v in flat:
                row.extend([v.real, v.imag])
            yield row


def _blocks(bundle: str, n: int) -> list[slice]:
    if bundle == "qh":
        return [slice(0, 1), slice(1, n + 1)]
    return [slice(0, 1 if bundle == "line" else n)]


def holonomy_loop(
    bundle: BundleKind,
    loop: Loop,
    steps: int = 1000,
    cls=0,
    record: bool = False,
) -> HolonomyResult:
    """Holonomy of ``bundle`` (tangent, line tau^l, or tau^l (+) T) around ``loop``."""
    if steps < 100:
        raise ValueError("steps must be >= 100")
    l = _as_int(cls)
    if bundle == "tangent":
        conn = tangent_connection_matrix
    elif bundle == "line":
        conn = lambda z, dz: line_connection_matrix(z, dz, l)  # noqa: E731
    elif bundle == "qh":
        conn = lambda z, dz: qh_connection_matrix(z, dz, l)  # noqa: E731
    else:
        raise ValueError(f"unknown bundle {bundle!r}")
    V, traj = transport(conn, loop, steps, record=True)
    n = len(loop.center)
    phases = tuple(_unwrapped_phase(traj, b) for b in _blocks(bundle, n))
    dev = float(np.linalg.norm(V - np.eye(V.shape[0]), ord=2))
    return HolonomyResult(bundle, l, loop, steps, V, dev, phases, traj if record else None)


def _gauss_polar(radius: float, nodes: int = 96, angles: int = 192):
    x, w = np.polynomial.legendre.leggauss(nodes)
    rho = 0.5 * radius * (x + 1)
    wr = 0.5 * radius * w
    phi = 2 * math.pi * np.arange(angles) / angles
    return rho, wr, phi, 2 * math.pi / angles


def enclosed_flux(bundle: BundleKind, loop: Loop, cls=0) -> tuple[complex, ...]:
    """``-integral of tr(curvature)`` over the flat disk bounded by ``loop``.

    The curvature is pulled back to the complex line through the loop's center
    along its direction ``u``: ``F_u = sum F_{k lbar} u_k conj(u_l)``. Since
    ``dz ^ dzbar = -2i dx ^ dy`` the result is ``2i * integral F_u dA``, one
    entry per block (same block order as ``holonomy_loop``).
    """
    l = _as_int(cls)
    u = np.array(loop.direction)
    c = np.array(loop.center)
    rho, wr, phi, wphi = _gauss_polar(loop.radius)

    def tangent_density(z):
        R = curvature_tangent(z)
        tr = np.einsum("iikl->kl", R)
        return u @ tr @ u.conj()

    def line_density(z):
        return u @ curvature_line(z, l) @ u.conj()

    if bundle == "tangent":
        densities = [tangent_density]
    elif bundle == "line":
        densities = [line_density]
    else:
        # dual connection -C^T has trace -tr C
        sign = -1.0 if l < 0 else 1.0
        densities = [line_density, lambda z: sign * tangent_density(z)]

    out = []
    for dens in densities:
        total = 0j
        for r, w in zip(rho, wr):
            ring = sum(dens(c + r * np.exp(1j * a) * u) for a in phi)
            total += w * r * ring * wphi
        out.append(2j * total)
    return tuple(out)


# --------------------------------------------------------------------------
# volume


@dataclass(frozen=True)
class IntegralResult:
    n: int
    value: float
    estimated_error: float
    method: str
    scale_factor: float
    samples: int = 0
    seed: int | None = None
    workers: int = 1

    @property
    def scaled_value(self) -> float:
        """Volume of ``(scale_factor * omega)^n``, which is ``n + 1``."""
        return self.value * self.scale_factor**self.n

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "value": self.value,
            "estimated_error": self.estimated_error,
            "method": self.method,
            "scale_factor": self.scale_factor,
            "scaled_value": self.scaled_value,
            "samples": self.samples,
            "seed": self.seed,
            "workers": self.workers,
        }


def volume_density(z: np.ndarray) -> np.ndarray:
    """Density of ``omega^n`` w.r.t. Lebesgue measure on C^n, batched over rows.

    ``omega^n = n! det(g) / pi^n dV`` under the convention above.
    """
    z = np.atleast_2d(z)
    n = z.shape[1]
    S = 1.0 + np.einsum("ai,ai->a", z.conj(), z).real
    g = np.eye(n)[None] / S[:, None, None] - np.einsum("ai,aj->aij", z.conj(), z) / (
        S**2
    )[:, None, None]
    return math.factorial(n) / math.pi**n * np.linalg.det(g).real


def _quadrature_volume(n: int, panels: int, order: int = 8, angles: int = 32) -> float:
    # z_i = tan(theta_i) exp(i phi_i), dV_i = tan(theta) sec^2(theta) dtheta dphi
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, math.pi / 2, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    theta = (0.5 * (b - a) * (x + 1) + a).reshape(-1)
    wt = (0.5 * (b - a) * w).reshape(-1)
    phi = 2 * math.pi * np.arange(angles) / angles
    wphi = np.full(angles, 2 * math.pi / angles)
    radial = np.tan(theta)
    jac = np.tan(theta) / np.cos(theta) ** 2
    axes_z = (radial[:, None] * np.exp(1j * phi)[None, :]).reshape(-1)
    axes_w = (wt[:, None] * jac[:, None] * wphi[None, :]).reshape(-1)
    grids = np.meshgrid(*([axes_z] * n), indexing="ij")
    weights = np.prod(np.meshgrid(*([axes_w] * n), indexing="ij"), axis=0).reshape(-1)
    z = np.stack([gr.reshape(-1) for gr in grids], axis=1)
    return float(volume_density(z) @ weights)


MC_BLOCK = 100_000


def _mc_block(n: int, count: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    box = (math.pi / 2 * 2 * math.pi) ** n
    theta = rng.uniform(0.0, math.pi / 2, size=(count, n))
    phi = rng.uniform(0.0, 2 * math.pi, size=(count, n))
    z = np.tan(theta) * np.exp(1j * phi)
    jac = np.prod(np.tan(theta) / np.cos(theta) ** 2, axis=1)
    f = volume_density(z) * jac * box
    return float(f.sum()), float((f * f).sum())


def volume_integral(
    n: int,
    method: Literal["quadrature", "monte_carlo"] = "quadrature",
    samples: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    panels: int = 16,
) -> IntegralResult:
    """Integral of ``omega_FS^n`` over the dense chart C^n of CP^n.

    The unnormalized result is 1; ``scale_factor = (n+1)^(1/n)`` rescales omega
    so that the volume becomes ``n + 1``.
    """
    if n not in (1, 2, 3):
        raise ValueError("volume_integral supports n in {1, 2, 3}")
    scale = (n + 1) ** (1.0 / n)
    if method == "quadrature":
        if n > 2:
            raise ValueError("tensor quadrature is limited to n <= 2; use monte_carlo")
        # the density only depends on |z_i|, so few angles suffice and the
        # n = 2 tensor grid can afford the same radial resolution as n = 1
        angles = 32 if n == 1 else 4
        coarse = _quadrature_volume(n, panels, angles=angles)
        fine = _quadrature_volume(n, 2 * panels, angles=angles)
        return IntegralResult(n, fine, abs(fine - coarse), method, scale)
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    if samples < 2:
        raise ValueError("need at least two samples")
    workers = max(1, int(workers))
    # one seed stream per fixed-size block: the result does not depend on workers
    nblocks = -(-samples // MC_BLOCK)
    streams = np.random.SeedSequence(seed).spawn(nblocks)
    counts = [min(MC_BLOCK, samples - i * MC_BLOCK) for i in range(nblocks)]
    if workers == 1:
        parts = [_mc_block(n, c, s) for c, s in zip(counts, streams)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _mc_block(n, *a), zip(counts, streams)))
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    err = math.sqrt(var / (samples - 1))
    return IntegralResult(n, mean, err, method, scale, samples, seed, workers)

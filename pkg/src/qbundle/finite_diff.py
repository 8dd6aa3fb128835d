"""Finite-difference oracles in Wirtinger form.

These work on real perturbations of the complex coordinates only, so they are
independent of any analytic derivative in the package.
"""

from __future__ import annotations

import numpy as np

FIRST_STEP = 1e-5
# Second differences lose ~eps/h^2 to rounding; 1e-5 would leave ~1e-6 noise.
# The step is scaled by max(1, |z|) since K varies on the scale |z| far out.
SECOND_STEP = 1e-4


def _unit(n: int, i: int, imaginary: bool) -> np.ndarray:
    e = np.zeros(n, dtype=np.complex128)
    e[i] = 1j if imaginary else 1.0
    return e


def wirtinger(f, z, h: float = FIRST_STEP):
    """Central-difference Wirtinger derivatives of ``f`` at ``z``.

    Returns ``(d, dbar)`` with the derivative index last, i.e.
    ``d[..., i] = df/dz_i`` and ``dbar[..., i] = df/dzbar_i``.
    """
    z = np.asarray(z, dtype=np.complex128)
    n = z.size
    dx, dy = [], []
    for i in range(n):
        ex, ey = _unit(n, i, False), _unit(n, i, True)
        dx.append((np.asarray(f(z + h * ex)) - np.asarray(f(z - h * ex))) / (2 * h))
        dy.append((np.asarray(f(z + h * ey)) - np.asarray(f(z - h * ey))) / (2 * h))
    dx = np.moveaxis(np.array(dx), 0, -1)
    dy = np.moveaxis(np.array(dy), 0, -1)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def holomorphic_jacobian(f, z, h: float = FIRST_STEP) -> np.ndarray:
    """``J[a, b] = df_a / dz_b`` for a vector-valued map ``f``."""
    d, _ = wirtinger(f, z, h)
    return d


def mixed_hessian(K, z, h: float | None = None) -> np.ndarray:
    """``H[i, j] = d^2 K / dz_i dzbar_j`` of a real scalar function ``K``."""
    z = np.asarray(z, dtype=np.complex128)
    n = z.size
    if h is None:
        h = SECOND_STEP * max(1.0, float(np.max(np.abs(z))))
    dirs = [_unit(n, i, False) for i in range(n)] + [_unit(n, i, True) for i in range(n)]
    real_hess = np.empty((2 * n, 2 * n))
    for a, u in enumerate(dirs):
        for b, v in enumerate(dirs[a:], start=a):
            val = (
                K(z + h * u + h * v)
                - K(z + h * u - h * v)
                - K(z - h * u + h * v)
                + K(z - h * u - h * v)
            ) / (4 * h * h)
            real_hess[a, b] = real_hess[b, a] = val
    xx = real_hess[:n, :n]
    yy = real_hess[n:, n:]
    xy = real_hess[:n, n:]
    return 0.25 * (xx + yy + 1j * (xy - xy.T))


def relative_error(approx, exact) -> float:
    """Norm-wise relative error ``|approx - exact| / max(|exact|, tiny)``."""
    approx = np.asarray(approx)
    exact = np.asarray(exact)
    scale = max(np.linalg.norm(exact), np.finfo(float).tiny)
    return float(np.linalg.norm(approx - exact) / scale)

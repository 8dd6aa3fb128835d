"""Numerical tolerances used across the package.

Every pass/fail decision in the library and the CLI reads its threshold from
``TOLERANCES``. The CLI can override individual entries with ``--tol KEY=VALUE``.

==========================  =========  =============================================
key                         default    meaning
==========================  =========  =============================================
chart                       1e-9       min |Z_j| (unit-normalized Z) for chart j
roundtrip                   1e-12      chart transition followed by its inverse
jacobian_cocycle            1e-10      chain-rule product of Jacobians vs identity
fd_jacobian                 1e-6       Jacobian vs central differences (relative)
fd_metric                   1e-5       metric vs second differences of K (relative)
fd_connection               1e-5       connection vs differences of metric (relative)
fd_curvature                1e-4       curvature vs differences of connection (rel.)
section_transition          1e-10      f_j - t_jk^l f_k on overlaps
line_cocycle                1e-10      t_jk t_km t_mj - 1
line_duality                1e-12      t(-l) * t(l) - 1
prequant                    1e-10      F(l=1) + 2 pi i omega (coefficient norm)
nonflat_min                 1e-2       curvature norm witnessing nonflatness
flat                        1e-8       curvature / holonomy bound for "flat"
holonomy_convergence        1e-8       change of holonomy when steps are doubled
holonomy_flux_rel           2e-2       holonomy angle vs enclosed curvature flux
holonomy_nontrivial         1e-1       min deviation for a nontrivial holonomy
volume_quad                 1e-6       quadrature volume on CP^1
volume_mc_rel               1e-2       Monte Carlo volume (relative)
qh_cocycle                  1e-10      T_mj T_km T_jk - I
transport_roundtrip         1e-12      state transported j -> k -> j
dual_pairing                1e-12      drift of <c, v> under joint transport
veronese                    1e-12      pulled-back O(1) transition vs tau^l
==========================  =========  =============================================
"""

from __future__ import annotations

from contextlib import contextmanager
from types import MappingProxyType

_DEFAULTS = {
    "chart": 1e-9,
    "roundtrip": 1e-12,
    "jacobian_cocycle": 1e-10,
    "fd_jacobian": 1e-6,
    "fd_metric": 1e-5,
    "fd_connection": 1e-5,
    "fd_curvature": 1e-4,
    "section_transition": 1e-10,
    "line_cocycle": 1e-10,
    "line_duality": 1e-12,
    "prequant": 1e-10,
    "nonflat_min": 1e-2,
    "flat": 1e-8,
    "holonomy_convergence": 1e-8,
    "holonomy_flux_rel": 2e-2,
    "holonomy_nontrivial": 1e-1,
    "volume_quad": 1e-6,
    "volume_mc_rel": 1e-2,
    "qh_cocycle": 1e-10,
    "transport_roundtrip": 1e-12,
    "dual_pairing": 1e-12,
    "veronese": 1e-12,
}

_ACTIVE = dict(_DEFAULTS)
TOLERANCES = MappingProxyType(_ACTIVE)

# Sampling box for affine coordinates: every sampled |z_i| lies in [R_MIN, R_MAX].
R_MIN = 0.1
R_MAX = 10.0


def resolve(overrides: dict[str, float] | None = None) -> dict[str, float]:
    """Return the tolerance table with ``overrides`` applied.

    Unknown keys raise ``KeyError`` so that typos on the command line do not
    silently fall back to the defaults.
    """
    table = dict(_DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in table:
            raise KeyError(f"unknown tolerance {key!r}")
        table[key] = float(value)
    return table


@contextmanager
def override(overrides: dict[str, float] | None = None):
    """Temporarily replace entries of ``TOLERANCES`` (process wide, not thread safe)."""
    table = resolve(overrides)
    saved = dict(_ACTIVE)
    _ACTIVE.update(table)
    try:
        yield TOLERANCES
    finally:
        _ACTIVE.clear()
        _ACTIVE.update(saved)

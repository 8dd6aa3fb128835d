"""Quantum Hilbert bundles QH_l = tau^l (+) T over CP^n, with numerical checks.

The package is organised bottom-up: ``projective_atlas`` (charts and
transitions), ``line_bundles`` (tau^l and its sections), ``hermitian_geometry``
(Fubini-Study metric, connections, holonomy, volume), ``quantum_bundle``
(the rank n+1 bundle), ``representations`` (dimension counts and the Veronese
map), ``general_manifold`` (pluggable atlases) and ``cli``.
"""

from .errors import (
    ChartUndefined,
    InvalidAtlas,
    InvalidModulus,
    LoopLeavesChart,
    OverlapUndefined,
    QBundleError,
    WrongDimension,
)
from .general_manifold import (
    AtlasSpec,
    build_qh_bundle,
    cpn_atlas,
    flatness_report,
    torus_atlas,
)
from .hermitian_geometry import (
    Loop,
    chern_connection,
    curvature_at,
    curvature_line,
    curvature_tangent,
    fs_metric,
    holonomy_loop,
    kahler_form,
    prequantization_residual,
    volume_integral,
)
from .line_bundles import GlobalSection, PicardClass, monomial_basis, tau_transition
from .projective_atlas import (
    AffinePoint,
    HomogeneousPoint,
    to_chart,
    transition_coords,
    transition_jacobian,
)
from .quantum_bundle import (
    FiberState,
    cocycle_residual,
    dual_transport,
    qh_transition,
    transport_state,
)
from .representations import rep_match_search, section_dim, su3_dim, veronese_map
from .tolerances import TOLERANCES

__version__ = "0.1.0"

__all__ = [
    "ChartUndefined",
    "InvalidAtlas",
    "InvalidModulus",
    "LoopLeavesChart",
    "OverlapUndefined",
    "QBundleError",
    "WrongDimension",
    "GlobalSection",
    "PicardClass",
    "monomial_basis",
    "tau_transition",
    "rep_match_search",
    "section_dim",
    "su3_dim",
    "veronese_map",
    "TOLERANCES",
    "AtlasSpec",
    "build_qh_bundle",
    "cpn_atlas",
    "flatness_report",
    "torus_atlas",
    "Loop",
    "chern_connection",
    "curvature_at",
    "curvature_line",
    "curvature_tangent",
    "fs_metric",
    "holonomy_loop",
    "kahler_form",
    "prequantization_residual",
    "volume_integral",
    "AffinePoint",
    "HomogeneousPoint",
    "to_chart",
    "transition_coords",
    "transition_jacobian",
    "FiberState",
    "cocycle_residual",
    "dual_transport",
    "qh_transition",
    "transport_state",
]

"""Command-line verification suites.

Usage::

    qbundle COMMAND [--n N] [--l L] [--samples S] [--seed SEED] [--steps STEPS]
                    [--output PATH] [--format json|csv] [--workers W] [--tol KEY=VALUE ...]

Exit status is 0 when every check passes, 1 when any check fails and 2 for an
invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import finite_diff as fd
from . import hermitian_geometry as hg
from . import tolerances
from .general_manifold import cpn_atlas, flatness_report, torus_atlas
from .line_bundles import monomial_basis
from .projective_atlas import (
    AffinePoint,
    HomogeneousPoint,
    sample_cpn,
    sample_overlap,
    transition_coords,
    transition_jacobian,
)
from .quantum_bundle import (
    FiberState,
    cocycle_residual,
    dual_transport,
    qh_transition,
    su2_selfduality_check,
    transport_state,
)
from .representations import (
    rep_match_search,
    section_dim,
    su3_dim,
    veronese_map,
    veronese_pullback_residual,
)
from .tolerances import TOLERANCES

SCHEMA = "qbundle/1"
COMMANDS = (
    "cocycle",
    "curvature",
    "prequant",
    "holonomy",
    "volume",
    "dims",
    "match",
    "veronese",
    "transport",
    "flatness",
    "all",
)


@dataclass
class RunConfig:
    command: str
    n: int = 2
    l: int = 1
    samples: int = 50
    seed: int = 0
    steps: int = 1000
    output: str | None = None
    format: str = "json"
    workers: int = 1
    mc_samples: int = 1_000_000
    radius: float = 1.0
    modulus: tuple[float, float] = (0.0, 1.0)
    trajectory: str | None = None
    tol: dict = field(default_factory=dict)

    def validate(self) -> list[str]:
        problems = []
        if self.command not in COMMANDS:
            problems.append(f"unknown command {self.command!r}")
        if not 1 <= self.n <= 4:
            problems.append("--n must be in 1..4")
        if abs(self.l) > 8:
            problems.append("--l must satisfy |l| <= 8")
        if not 1 <= self.samples <= 10**7:
            problems.append("--samples must be in 1..10^7")
        if not 2 <= self.mc_samples <= 10**7:
            problems.append("--mc-samples must be in 2..10^7")
        if self.steps < 100:
            problems.append("--steps must be >= 100")
        if self.workers < 1:
            problems.append("--workers must be >= 1")
        if self.radius <= 0:
            problems.append("--radius must be positive")
        if self.modulus[1] <= 0:
            problems.append("--modulus must have positive imaginary part")
        if self.command == "volume" and self.n > 3:
            problems.append("volume supports --n in 1..3")
        if self.command in ("match", "veronese") and self.l < 1:
            problems.append(f"{self.command} needs --l >= 1")
        try:
            tolerances.resolve(self.tol)
        except KeyError as exc:
            problems.append(str(exc.args[0]))
        return problems


def _f(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


def check(op, params, residuals=None, tol=None, value=None, error=None, passed=None, **detail):
    """One GeometryReport entry.

    With ``residuals`` and ``tol`` the check passes iff every residual is <= tol.
    """
    res = None if residuals is None else np.asarray(residuals, dtype=float).reshape(-1)
    if passed is None:
        passed = bool(res is not None and res.size and np.all(res <= tol))
    out = {
        "op": op,
        "params": params,
        "samples": 0 if res is None else int(res.size),
        "max_residual": None if res is None or not res.size else _f(res.max()),
        "mean_residual": None if res is None or not res.size else _f(res.mean()),
        "value": _f(value) if isinstance(value, (int, float, np.floating)) else value,
        "error": _f(error),
        "tolerance": _f(tol),
        "pass": bool(passed),
    }
    out.update(detail)
    return out


def _chart_triples(n: int):
    if n == 1:
        return [(0, 1, 0), (1, 0, 1)]
    return list(itertools.permutations(range(n + 1), 3))


# --------------------------------------------------------------------------
# suites


def suite_cocycle(cfg: RunConfig):
    out = []
    for j, k, m in _chart_triples(cfg.n):
        rep = cocycle_residual(cfg.n, j, k, m, cfg.l, cfg.samples, cfg.seed)
        out.append(
            check(
                "cocycle",
                {"n": cfg.n, "l": cfg.l, "charts": [j, k, m], "seed": cfg.seed},
                passed=rep.pass_,
                tol=rep.tolerance,
                max_residual=_f(rep.max_residual),
                mean_residual=_f(rep.mean_residual),
                samples=rep.samples,
            )
        )
    res = []
    for j, k in itertools.permutations(range(cfg.n + 1), 2):
        for p in sample_overlap(cfg.n, j, k, cfg.samples, cfg.seed):
            back = transition_coords(transition_coords(p, k), j)
            res.append(np.max(np.abs(back.coords - p.coords)))
    out.append(check("transition_roundtrip", {"n": cfg.n}, res, TOLERANCES["roundtrip"]))
    return out


def _fd_points(cfg):
    return sample_overlap(cfg.n, 0, 0, cfg.samples, cfg.seed)


def fd_residuals(points):
    """Relative errors of every analytic derivative against central differences."""
    metric, conn, curv, jac = [], [], [], []
    for p in points:
        z = p.coords
        g = hg.fs_metric(z).g
        metric.append(fd.relative_error(fd.mixed_hessian(hg.kahler_potential, z), g))
        d, _ = fd.wirtinger(lambda w: hg.fs_metric(w).g, z)
        gamma_fd = np.einsum("il,klj->ijk", hg.inverse_metric(g), d)
        conn.append(fd.relative_error(gamma_fd, hg.chern_connection(z)))
        _, dbar = fd.wirtinger(hg.chern_connection, z)
        curv.append(fd.relative_error(-dbar, hg.curvature_tangent(z)))
        for k in range(p.n + 1):
            if k == p.chart:
                continue
            J_fd = fd.holomorphic_jacobian(
                lambda w: transition_coords(AffinePoint(p.chart, w), k).coords, z
            )
            jac.append(fd.relative_error(J_fd, transition_jacobian(p, k)))
    return metric, conn, curv, jac


def suite_curvature(cfg: RunConfig):
    params = {"n": cfg.n, "seed": cfg.seed}
    metric, conn, curv, jac = fd_residuals(_fd_points(cfg))
    out = [
        check("fd_metric", params, metric, TOLERANCES["fd_metric"]),
        check("fd_connection", params, conn, TOLERANCES["fd_connection"]),
        check("fd_curvature", params, curv, TOLERANCES["fd_curvature"]),
        check("fd_jacobian", params, jac, TOLERANCES["fd_jacobian"]),
    ]
    herm, posdef = [], True
    for p in _fd_points(cfg):
        m = hg.fs_metric(p)
        herm.append(np.max(np.abs(m.g - m.g.conj().T)))
        posdef &= m.is_positive_definite()
    out.append(
        check("metric_hermitian", params, herm, 1e-13, passed=posdef and max(herm) <= 1e-13)
    )
    norms = [np.linalg.norm(hg.curvature_tangent(p)) for p in sample_cpn(cfg.n, cfg.samples, cfg.seed)]
    out.append(
        check(
            "tangent_nonflat",
            params,
            value=min(norms),
            tol=TOLERANCES["nonflat_min"],
            passed=min(norms) > TOLERANCES["nonflat_min"],
            max_norm=_f(max(norms)),
        )
    )
    return out


def suite_prequant(cfg: RunConfig):
    pts = sample_cpn(cfg.n, cfg.samples, cfg.seed)
    res = [hg.prequantization_residual(p) for p in pts]
    return [check("prequant", {"n": cfg.n, "l": 1, "seed": cfg.seed}, res, TOLERANCES["prequant"])]


def suite_holonomy(cfg: RunConfig):
    n, l = cfg.n, cfg.l
    loop = hg.Loop(np.zeros(n), cfg.radius)
    params = {"n": n, "l": l, "radius": cfg.radius, "steps": cfg.steps, "bundle": "qh"}
    coarse = hg.holonomy_loop("qh", loop, cfg.steps, l, record=cfg.trajectory is not None)
    fine = hg.holonomy_loop("qh", loop, 2 * cfg.steps, l)
    if cfg.trajectory:
        with open(cfg.trajectory, "w", newline="") as fh:
            writer = csv.writer(fh)
            m = coarse.matrix.shape[0]
            header = ["t"] + [
                f"{part}_V{a}{b}" for a in range(m) for b in range(m) for part in ("re", "im")
            ]
            writer.writerow(header)
            writer.writerows(coarse.trajectory_rows())
    out = [
        check(
            "holonomy_convergence",
            params,
            [np.linalg.norm(coarse.matrix - fine.matrix, ord=2)],
            TOLERANCES["holonomy_convergence"],
            value=coarse.deviation_from_identity,
        )
    ]
    flux = hg.enclosed_flux("qh", loop, l)
    rel = TOLERANCES["holonomy_flux_rel"]
    for name, phase, fl in zip(("vacuum", "tangent"), coarse.block_phases, flux):
        target = fl.imag
        err = abs(phase - target)
        out.append(
            check(
                "holonomy_flux",
                {**params, "block": name},
                value=phase,
                error=err,
                tol=rel,
                passed=err <= rel * max(abs(target), 1e-12) or (abs(target) < 1e-12 and err < 1e-8),
                flux=_f(target),
            )
        )
    tiny = hg.holonomy_loop("qh", hg.Loop(np.zeros(n), 1e-4), cfg.steps, l)
    out.append(
        check(
            "holonomy_small_loop",
            {**params, "radius": 1e-4},
            [tiny.deviation_from_identity],
            1e-6,
        )
    )
    return out


def suite_volume(cfg: RunConfig, n: int | None = None):
    n = cfg.n if n is None else n
    if n == 1:
        res = hg.volume_integral(1, "quadrature")
        tol = TOLERANCES["volume_quad"]
    else:
        res = hg.volume_integral(n, "monte_carlo", cfg.mc_samples, cfg.seed, cfg.workers)
        tol = TOLERANCES["volume_mc_rel"]
    ok = abs(res.value - 1.0) <= tol and abs(res.scaled_value - (n + 1)) <= (n + 1) * tol
    return [
        check(
            "volume",
            {"n": n, "method": res.method, "samples": res.samples, "seed": res.seed,
             "workers": res.workers},
            value=res.value,
            error=res.estimated_error,
            tol=tol,
            passed=ok,
            scale_factor=_f(res.scale_factor),
            scaled_value=_f(res.scaled_value),
        )
    ]


def suite_dims(cfg: RunConfig, n_max: int | None = None, l_max: int | None = None):
    if n_max is None:
        rows = [(cfg.n, cfg.l)]
    else:
        rows = [(n, l) for n in range(1, n_max + 1) for l in range(l_max + 1)]
    table, bad = [], 0
    for n, l in rows:
        d = section_dim(n, l)
        exact = math.comb(n + l, n) if l >= 0 else 0
        bad += d != exact or d != len(monomial_basis(n, l))
        table.append([n, l, d])
    value = table[0][2] if len(table) == 1 else None
    return [check("dims", {"rows": len(table)}, value=value, passed=bad == 0, table=table)]


def suite_match(cfg: RunConfig, ls=None):
    ls = [cfg.l] if ls is None else ls
    table, ok = [], True
    for l in ls:
        found = sorted(rep_match_search(l, 20, 20))
        ok &= set(found) == {(l, 0), (0, l)}
        table.append([l, [list(pq) for pq in found]])
    spot = su3_dim(1, 0) == 3 and su3_dim(1, 1) == 8 and su3_dim(0, 0) == 1
    return [
        check("match", {"bounds": [20, 20]}, passed=ok, table=table),
        check("su3_dim", {}, passed=spot, value=None, table=[[1, 0, 3], [1, 1, 8], [0, 0, 1]]),
    ]


def suite_veronese(cfg: RunConfig, l: int | None = None):
    l = cfg.l if l is None else l
    res = []
    for j, k in itertools.permutations(range(cfg.n + 1), 2):
        for p in sample_overlap(cfg.n, j, k, cfg.samples, cfg.seed):
            res.append(veronese_pullback_residual(p, k, l))
    rng = np.random.default_rng(cfg.seed)
    equiv = []
    for _ in range(cfg.samples):
        Z = rng.standard_normal(cfg.n + 1) + 1j * rng.standard_normal(cfg.n + 1)
        lam = complex(rng.standard_normal(), rng.standard_normal())
        equiv.append(
            veronese_map(HomogeneousPoint(lam * Z), l).equivalent(
                veronese_map(HomogeneousPoint(Z), l), 1e-12
            )
        )
    return [
        check("veronese_pullback", {"n": cfg.n, "l": l}, res, TOLERANCES["veronese"]),
        check("veronese_equivariance", {"n": cfg.n, "l": l}, passed=all(equiv)),
    ]


def suite_transport(cfg: RunConfig):
    n, l = cfg.n, cfg.l
    rng = np.random.default_rng(cfg.seed)
    roundtrip, block, pairing, compose, phase = [], [], [], [], []
    for j, k in itertools.permutations(range(n + 1), 2):
        for p in sample_overlap(n, j, k, cfg.samples, cfg.seed + 7 * j + k):
            amp = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
            cov = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
            s = FiberState.from_components(p, amp, l)
            c = FiberState.from_components(p, cov, l, covector=True)
            t = transport_state(s, k)
            back = transport_state(t, j)
            roundtrip.append(np.max(np.abs(back.components() - s.components())))
            vac = transport_state(FiberState(p, amp[0], np.zeros(n), l), k)
            exc = transport_state(FiberState(p, 0.0, amp[1:], l), k)
            block.append(max(np.max(np.abs(vac.excitations)), abs(exc.vacuum)))
            before = c.pairing(s)
            after = dual_transport(c, k).pairing(t)
            pairing.append(abs(after - before) / max(abs(before), 1e-300))
            for m in range(n + 1):
                if m in (j, k):
                    continue
                two = qh_transition(transition_coords(p, k), m, l).matrix @ qh_transition(p, k, l).matrix
                direct = qh_transition(p, m, l).matrix
                compose.append(np.linalg.norm(two - direct, ord=2) / np.linalg.norm(direct, ord=2))
                # the phase-only vacuum factors t/|t| obey the same cocycle
                q = transition_coords(p, k)
                ring = (
                    qh_transition(p, k, l).unitary_scalar
                    * qh_transition(q, m, l).unitary_scalar
                    * qh_transition(transition_coords(q, m), j, l).unitary_scalar
                )
                phase.append(abs(ring - 1))
    params = {"n": n, "l": l, "seed": cfg.seed}
    out = [
        check("transport_roundtrip", params, roundtrip, TOLERANCES["transport_roundtrip"]),
        check("block_structure", params, block, 0.0),
        check("dual_pairing", params, pairing, TOLERANCES["dual_pairing"]),
    ]
    if compose:
        out.append(check("transport_composition", params, compose, TOLERANCES["qh_cocycle"]))
        out.append(check("unitary_vacuum_cocycle", params, phase, TOLERANCES["line_cocycle"]))
    if n == 1:
        sd = [su2_selfduality_check(p, l) for p in sample_overlap(1, 0, 1, cfg.samples, cfg.seed)]
        out.append(check("su2_selfduality", params, sd, 0.0))
    return out


def suite_flatness(cfg: RunConfig):
    rep = flatness_report(cpn_atlas(cfg.n), cfg.l, samples=20, seed=cfg.seed)
    tau = complex(*cfg.modulus)
    torus = flatness_report(torus_atlas(tau), 0, samples=20, seed=cfg.seed)
    return [
        check(
            "flatness",
            {"manifold": "cpn", "n": cfg.n, "l": cfg.l},
            passed=not rep.tangent_flat and not rep.qh_flat,
            report=rep.to_json(),
        ),
        check(
            "flatness",
            {"manifold": "torus", "modulus": list(cfg.modulus), "l": 0},
            passed=torus.qh_flat,
            report=torus.to_json(),
        ),
    ]


def suite_all(cfg: RunConfig):
    l_pos = cfg.l if cfg.l >= 1 else 1
    out = []
    out += suite_cocycle(cfg)
    out += suite_curvature(cfg)
    out += suite_prequant(cfg)
    out += suite_holonomy(cfg)
    out += suite_volume(cfg, 1)
    out += suite_volume(cfg, 2)
    out += suite_dims(cfg, 6, 8)
    out += suite_match(cfg, list(range(1, 9)))
    out += suite_veronese(cfg, l_pos)
    out += suite_transport(cfg)
    out += suite_flatness(cfg)
    return out


SUITES = {
    "cocycle": suite_cocycle,
    "curvature": suite_curvature,
    "prequant": suite_prequant,
    "holonomy": suite_holonomy,
    "volume": suite_volume,
    "dims": suite_dims,
    "match": suite_match,
    "veronese": suite_veronese,
    "transport": suite_transport,
    "flatness": suite_flatness,
    "all": suite_all,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Run the configured suite; return ``(exit_status, report)``."""
    problems = cfg.validate()
    if problems:
        raise ValueError("; ".join(problems))
    with tolerances.override(cfg.tol):
        checks = SUITES[cfg.command](cfg)
        table = dict(TOLERANCES)
    config = asdict(cfg)
    config.pop("output")
    config.pop("format")
    config.pop("trajectory")
    report = {
        "schema": SCHEMA,
        "command": cfg.command,
        "config": config,
        "tolerances": table,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }
    return (0 if report["pass"] else 1), report


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = ["op", "params", "samples", "max_residual", "mean_residual", "value", "error", "pass"]
    writer.writerow(cols)
    for c in report["checks"]:
        writer.writerow(
            [json.dumps(c[k], sort_keys=True) if k == "params" else c[k] for k in cols]
        )
    return buf.getvalue()


def _parse_tol(items):
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"--tol expects KEY=VALUE, got {item!r}")
        out[key] = float(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbundle",
        description="Verify the QH_l bundle identities on CP^n and a flat torus.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--n", type=int, default=2, help="complex dimension (1..4)")
    parser.add_argument("--l", type=int, default=1, help="Picard class (|l| <= 8)")
    parser.add_argument("--samples", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--steps", type=int, default=1000, help="RK4 steps per loop")
    parser.add_argument("--mc-samples", type=int, default=1_000_000)
    parser.add_argument("--radius", type=float, default=1.0, help="holonomy loop radius")
    parser.add_argument("--modulus", type=float, nargs=2, default=(0.0, 1.0),
                        metavar=("RE", "IM"), help="torus modulus for flatness")
    parser.add_argument("--workers", type=int,
                        default=int(os.environ.get("QBUNDLE_THREADS", "1") or 1))
    parser.add_argument("--output", "-o", default=None, help="report path (default stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--trajectory", default=None,
                        help="CSV path for the holonomy transport trajectory")
    parser.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="override a tolerance (repeatable)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _parse_tol(args.tol)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    cfg = RunConfig(
        command=args.command,
        n=args.n,
        l=args.l,
        samples=args.samples,
        seed=args.seed,
        steps=args.steps,
        output=args.output,
        format=args.format,
        workers=args.workers,
        mc_samples=args.mc_samples,
        radius=args.radius,
        modulus=tuple(args.modulus),
        trajectory=args.trajectory,
        tol=tol,
    )
    problems = cfg.validate()
    if problems:
        parser.error("; ".join(problems))
    status, report = run(cfg)
    text = render(report, cfg.format)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())

"""Acceptance criteria 1-11, one test each.

Every test records a single ``criterion N: PASS|FAIL ...`` line (printed in the
terminal summary) before asserting, so failures still leave a readable line.
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from qbundle import hermitian_geometry as hg
from qbundle.cli import fd_residuals
from qbundle.general_manifold import cpn_atlas, flatness_report, torus_atlas
from qbundle.line_bundles import monomial_basis
from qbundle.projective_atlas import sample_cpn, sample_overlap
from qbundle.quantum_bundle import cocycle_residual, qh_transition
from qbundle.representations import (
    rep_match_search,
    section_dim,
    su3_dim,
    veronese_pullback_residual,
)
from qbundle.tolerances import TOLERANCES


@pytest.fixture
def record(acceptance_log):
    def _record(number, ok, detail, started, limit=None):
        elapsed = time.perf_counter() - started
        within = limit is None or elapsed < limit
        status = "PASS" if ok and within else "FAIL"
        budget = "" if limit is None else f" / limit {limit:g}s"
        line = f"criterion {number}: {status}  {detail}  [{elapsed:.2f}s{budget}]"
        print(line)
        acceptance_log.append(line)
        return ok and within

    return _record


def test_criterion_01_section_dimensions(record):
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 7):
        for l in range(0, 9):
            d = section_dim(n, l)
            if not (d == math.comb(n + l, n) == len(monomial_basis(n, l))):
                bad.append((n, l))
    assert record(1, not bad, f"section_dim = C(n+l,n) = basis length, n<=6, l<=8; mismatches {bad}", t0, 1.0)


def test_criterion_02_cocycle(record):
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for n in (2, 3):
        for j, k, m in itertools.permutations(range(n + 1), 3):
            for l in range(-2, 4):
                rep = cocycle_residual(n, j, k, m, l, 50, seed=42)
                worst = max(worst, rep.max_residual)
                count += 1
    ok = worst <= 1e-10
    assert record(2, ok, f"{count} (triple, l) cases on CP^2, CP^3; max residual {worst:.2e} <= 1e-10", t0, 10.0)


def test_criterion_03_prequantization(record):
    t0 = time.perf_counter()
    worst = max(
        hg.prequantization_residual(p) for n in (1, 2) for p in sample_cpn(n, 200, seed=3)
    )
    worst = max(
        worst,
        max(hg.prequantization_residual(p) for n in (1, 2) for p in sample_overlap(n, 0, 1, 200, 4)),
    )
    assert record(3, worst <= 1e-10, f"max prequantization residual {worst:.2e} <= 1e-10", t0, 5.0)


def test_criterion_04_volume(record):
    t0 = time.perf_counter()
    q = hg.volume_integral(1, "quadrature")
    mc = hg.volume_integral(2, "monte_carlo", samples=1_000_000, seed=42)
    ok = (
        abs(q.value - 1) <= 1e-6
        and abs(q.scaled_value - 2) <= 2e-6
        and abs(mc.value - 1) <= 0.01
        and abs(mc.scaled_value - 3) <= 0.03
    )
    detail = (
        f"CP^1 quad {q.value:.9f} (scaled {q.scaled_value:.6f}); "
        f"CP^2 MC {mc.value:.5f} +- {mc.estimated_error:.1e} (scaled {mc.scaled_value:.4f})"
    )
    assert record(4, ok, detail, t0, 60.0)


def test_criterion_05_nonflat_tangent_bundle(record):
    t0 = time.perf_counter()
    norms = [np.linalg.norm(hg.curvature_tangent(p)) for n in (1, 2) for p in sample_cpn(n, 100, 5)]
    loop = hg.Loop([0], 1.0)
    qh = hg.holonomy_loop("qh", loop, 1000, cls=1)
    flux = hg.enclosed_flux("qh", loop, 1)
    rel = [abs(ph - f.imag) / abs(f.imag) for ph, f in zip(qh.block_phases, flux)]
    tangent = hg.holonomy_loop("tangent", loop, 1000)
    (tflux,) = hg.enclosed_flux("tangent", loop)
    t_rel = abs(tangent.block_phases[0] - tflux.imag) / abs(tflux.imag)
    ok = (
        min(norms) > 0.01
        and qh.deviation_from_identity > 0.1
        and max(rel) <= 0.02
        and t_rel <= 0.02
    )
    detail = (
        f"min |R| {min(norms):.3f} > 0.01 over 200 points; QH_1 unit-circle deviation "
        f"{qh.deviation_from_identity:.3f} > 0.1, flux rel err {max(rel):.1e}; "
        f"tangent angle {tangent.block_phases[0]:.6f} vs flux {tflux.imag:.6f} "
        f"(rel {t_rel:.1e}, deviation {tangent.deviation_from_identity:.1e})"
    )
    assert record(5, ok, detail, t0, 30.0)


def test_criterion_06_flat_contrast(record):
    t0 = time.perf_counter()
    torus = flatness_report(torus_atlas(1j), 0, samples=20, seed=1)
    cp1 = [flatness_report(cpn_atlas(1), l, samples=20, seed=1) for l in range(-3, 4)]
    ok = (
        torus.max_tangent_curvature <= 1e-10
        and torus.max_line_curvature <= 1e-10
        and torus.max_tangent_holonomy <= 1e-10
        and torus.max_line_holonomy <= 1e-10
        and torus.qh_flat
        and not any(r.qh_flat for r in cp1)
    )
    detail = (
        f"torus curvature {max(torus.max_tangent_curvature, torus.max_line_curvature):.1e}, "
        f"holonomy {max(torus.max_tangent_holonomy, torus.max_line_holonomy):.1e}, qh_flat "
        f"{torus.qh_flat}; CP^1 qh_flat for l=-3..3: {[r.qh_flat for r in cp1]}"
    )
    assert record(6, ok, detail, t0, 10.0)


def test_criterion_07_su2_selfduality(record):
    t0 = time.perf_counter()
    worst = 0.0
    for l in range(-3, 4):
        for j in (0, 1):
            for p in sample_overlap(1, j, 1 - j, 100, seed=10 + l):
                T = qh_transition(p, 1 - j, l).matrix
                worst = max(worst, float(np.linalg.norm(T - T.T)))
    assert record(7, worst == 0.0, f"max ||T - T^T|| = {worst} over 1400 CP^1 transitions", t0)


def test_criterion_08_representation_matching(record):
    t0 = time.perf_counter()
    found = {l: rep_match_search(l, 20, 20) for l in range(1, 9)}
    extra = {l: sorted(s - {(l, 0), (0, l)}) for l, s in found.items() if s != {(l, 0), (0, l)}}
    spots = su3_dim(1, 0) == 3 and su3_dim(1, 1) == 8
    ok = not extra and spots
    detail = (
        f"exact {{(l,0),(0,l)}} for l=1..8 at bounds 20; extra pairs {extra}"
        f" (d(2,1) = 15 = C(6,2)); su3 spot values ok: {spots}"
    )
    assert record(8, ok, detail, t0, 1.0)


def test_criterion_09_veronese_descent(record):
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for n in (1, 2):
        for l in (1, 2, 3):
            for j, k in itertools.permutations(range(n + 1), 2):
                for p in sample_overlap(n, j, k, 100, seed=7 * j + k):
                    worst = max(worst, veronese_pullback_residual(p, k, l))
                    count += 1
    assert record(9, worst <= 1e-12, f"{count} points, max pullback residual {worst:.1e} <= 1e-12", t0)


def test_criterion_10_oracle_consistency(record):
    t0 = time.perf_counter()
    worst = {"metric": 0.0, "connection": 0.0, "curvature": 0.0, "jacobian": 0.0}
    for n in (1, 2, 3):
        metric, conn, curv, jac = fd_residuals(sample_overlap(n, 0, 0, 50, seed=100 + n))
        for key, vals in zip(worst, (metric, conn, curv, jac)):
            worst[key] = max(worst[key], max(vals))
    limits = {
        "metric": TOLERANCES["fd_metric"],
        "connection": TOLERANCES["fd_connection"],
        "curvature": TOLERANCES["fd_curvature"],
        "jacobian": TOLERANCES["fd_jacobian"],
    }
    ok = all(worst[k] <= limits[k] for k in worst)
    detail = ", ".join(f"{k} {worst[k]:.1e} <= {limits[k]:g}" for k in worst)
    assert record(10, ok, f"50 points on CP^1..CP^3: {detail}", t0)


def test_criterion_11_determinism(record, tmp_path):
    t0 = time.perf_counter()
    outputs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "qbundle", "all", "--seed", "42", "-o", str(path)],
            capture_output=True,
        )
        assert proc.returncode in (0, 1), proc.stderr.decode()
        outputs.append(path.read_bytes())
    same = outputs[0] == outputs[1]
    assert record(11, same, f"`qbundle all --seed 42` twice: byte-identical = {same} ({len(outputs[0])} bytes)", t0)

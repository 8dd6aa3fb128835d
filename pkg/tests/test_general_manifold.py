import dataclasses

import numpy as np
import pytest

from qbundle.errors import InvalidAtlas, InvalidModulus
from qbundle.general_manifold import (
    atlas_from_json,
    build_qh_bundle,
    cpn_atlas,
    flatness_report,
    torus_atlas,
    validate_atlas,
)
from qbundle.projective_atlas import AffinePoint, sample_overlap
from qbundle.quantum_bundle import cocycle_residual, qh_transition


def test_cpn_atlas_reproduces_quantum_bundle():
    bundle = build_qh_bundle(cpn_atlas(2), 1)
    for p in sample_overlap(2, 0, 1, 10, 0):
        assert np.array_equal(bundle.qh_transition(p, 1).matrix, qh_transition(p, 1, 1).matrix)
    mx, mean, count = bundle.cocycle_residual(0, 1, 2, 50, 0)
    assert mx == cocycle_residual(2, 0, 1, 2, 1, 50, 0).max_residual


def test_torus_atlas():
    atlas = torus_atlas(1j)
    assert atlas.r == 4
    bundle = build_qh_bundle(atlas, 0)
    for j in range(4):
        for k in range(4):
            if j == k:
                continue
            for p in atlas.sampler(j, k, 5, 1):
                assert np.array_equal(atlas.jacobian(p, k), np.eye(1))
                assert np.array_equal(bundle.qh_transition(p, k).matrix, np.eye(2))
    for triple in [(0, 1, 2), (0, 1, 3), (1, 2, 3)]:
        assert bundle.cocycle_residual(*triple, 10, 0)[0] == 0
    for p in atlas.loop_centers(10, 0):
        assert np.linalg.norm(atlas.curvature(p.chart, p.coords)) == 0


def test_torus_rejects_bad_modulus():
    with pytest.raises(InvalidModulus):
        torus_atlas(1 - 0.5j)
    with pytest.raises(InvalidModulus):
        torus_atlas(2.0)


def test_broken_jacobian_is_rejected():
    atlas = cpn_atlas(1)
    broken = dataclasses.replace(atlas, jacobian=lambda p, k: 2 * atlas.jacobian(p, k))
    with pytest.raises(InvalidAtlas):
        validate_atlas(broken)
    with pytest.raises(InvalidAtlas):
        build_qh_bundle(broken, 1)


def test_flatness_examples():
    torus = flatness_report(torus_atlas(0.3 + 1.1j), 0)
    assert torus.tangent_flat and torus.line_flat and torus.qh_flat
    assert torus.max_tangent_holonomy <= 1e-10
    cp1 = flatness_report(cpn_atlas(1), 1)
    assert not cp1.tangent_flat and not cp1.qh_flat
    cp2 = flatness_report(cpn_atlas(2), 0)
    assert not cp2.tangent_flat and cp2.line_flat and not cp2.qh_flat
    assert cp2.to_json()["qh_flat"] is False


def test_atlas_from_json():
    assert atlas_from_json({"type": "cpn", "n": 3}).n == 3
    t = atlas_from_json({"type": "torus", "modulus": [0.5, 2.0]})
    assert t.n == 1 and t.to_json()["type"] == "torus"
    with pytest.raises(InvalidAtlas):
        atlas_from_json({"type": "klein"})


def test_torus_points_outside_charts():
    atlas = torus_atlas(1j)
    assert not atlas.contains(0, np.array([0.45 + 0.45j]))
    assert atlas.contains(0, np.array([0.1 + 0.1j]))
    assert isinstance(atlas.sampler(0, 1, 1, 0)[0], AffinePoint)

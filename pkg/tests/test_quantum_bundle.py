import json

import numpy as np
import pytest

from qbundle.errors import WrongDimension
from qbundle.line_bundles import tau_transition
from qbundle.projective_atlas import AffinePoint, sample_overlap, transition_coords, transition_jacobian
from qbundle.quantum_bundle import (
    FiberState,
    cocycle_residual,
    dual_transport,
    fiber_frame,
    qh_transition,
    su2_selfduality_check,
    transport_state,
)


def test_fiber_frame():
    assert len(fiber_frame(0, 2, 1)) == 3
    assert len(fiber_frame(1, 1, 1)) == 2
    assert {len(fiber_frame(0, 3, l)) for l in range(-3, 4)} == {4}


def test_qh_transition_examples():
    p = AffinePoint(0, [2])
    T = qh_transition(p, 1, 1)
    assert np.allclose(T.matrix, np.diag([2, -0.25]))
    assert T.scalar == 2
    q = AffinePoint(0, [1 + 2j, -0.5])
    assert qh_transition(q, 2, 0).matrix[0, 0] == 1
    assert np.array_equal(qh_transition(q, 0, 3).matrix, np.eye(3))


def test_qh_transition_blocks():
    p = AffinePoint(1, [0.3j, 2.0])
    for l in (-2, 0, 3):
        M = qh_transition(p, 2, l).matrix
        assert M[0, 0] == pytest.approx(tau_transition(p, 2, l))
        assert np.all(M[0, 1:] == 0) and np.all(M[1:, 0] == 0)
    J = transition_jacobian(p, 2)
    assert np.allclose(qh_transition(p, 2, 1).matrix[1:, 1:], J)


def test_transport_examples():
    s = FiberState(AffinePoint(0, [2]), 1.0, [1.0], 1)
    t = transport_state(s, 1)
    assert t.chart == 1 and np.allclose(t.point.coords, [0.5])
    assert np.allclose(t.components(), [2, -0.25])
    back = transport_state(t, 0)
    assert np.max(np.abs(back.components() - s.components())) <= 1e-12


def test_dual_transport_examples():
    c = FiberState(AffinePoint(0, [2]), 1.0, [1.0], 1, covector=True)
    d = dual_transport(c, 1)
    assert np.allclose(d.components(), [0.5, -4])
    assert np.array_equal(dual_transport(c, 0).components(), c.components())


def test_dual_pairing_invariance(rng):
    drift = []
    for p in sample_overlap(2, 0, 1, 100, 4):
        v = FiberState.from_components(p, rng.standard_normal(3) + 1j * rng.standard_normal(3), 1)
        c = FiberState.from_components(p, rng.standard_normal(3) + 1j * rng.standard_normal(3), 1, True)
        before = c.pairing(v)
        after = dual_transport(c, 1).pairing(transport_state(v, 1))
        drift.append(abs(after - before) / abs(before))
    assert max(drift) <= 1e-12


@pytest.mark.parametrize("l", [-3, -1, 0, 1, 2])
def test_cocycle(l):
    assert cocycle_residual(2, 0, 1, 2, l, 50, 0).pass_
    assert cocycle_residual(1, 0, 1, 0, l, 50, 0).pass_
    rep = cocycle_residual(3, 3, 1, 2, l, 20, 1)
    assert rep.max_residual <= 1e-10


def test_composition_matches_direct():
    for p in sample_overlap(3, 0, 2, 20, 6):
        q = transition_coords(p, 2)
        two = qh_transition(q, 3, 2).matrix @ qh_transition(p, 2, 2).matrix
        direct = qh_transition(p, 3, 2).matrix
        assert np.linalg.norm(two - direct, 2) <= 1e-10 * np.linalg.norm(direct, 2)


def test_cotangent_variant():
    p = AffinePoint(0, [2])
    assert np.allclose(qh_transition(p, 1, 1, cotangent=True).matrix, np.diag([2, -4]))
    assert np.allclose(qh_transition(p, 1, -1).matrix, np.diag([0.5, -4]))


def test_su2_selfduality():
    assert su2_selfduality_check(AffinePoint(0, [2]), 1) == 0
    assert su2_selfduality_check(AffinePoint(0, [1 + 1j]), -2) == 0
    with pytest.raises(WrongDimension):
        su2_selfduality_check(AffinePoint(0, [1, 2]), 1)


def test_state_json_round_trip():
    s = FiberState(AffinePoint(2, [1 + 1j, -3]), 0.5j, [1, 2 - 1j], -2)
    t = FiberState.from_json(json.loads(json.dumps(s.to_json())))
    assert t.cls == -2 and t.chart == 2
    assert np.array_equal(t.components(), s.components())


def test_block_structure_preserved():
    p = AffinePoint(0, [0.4, 3j])
    vac = transport_state(FiberState(p, 1.0, [0, 0], 2), 1)
    assert np.all(vac.excitations == 0)
    exc = transport_state(FiberState(p, 0.0, [1, 1], 2), 2)
    assert exc.vacuum == 0


def test_unitary_vacuum_factor():
    T = qh_transition(AffinePoint(0, [3 - 4j]), 1, 2)
    assert abs(T.unitary_scalar) == pytest.approx(1.0)
    assert T.unitary_scalar == pytest.approx(T.scalar / abs(T.scalar))

import json

import numpy as np
import pytest

from qbundle.errors import OverlapUndefined
from qbundle.line_bundles import (
    GlobalSection,
    PicardClass,
    monomial_basis,
    section_local,
    section_transition_residual,
    tau_transition,
    unitary_gauge,
)
from qbundle.projective_atlas import AffinePoint, sample_overlap, transition_coords
from qbundle.tolerances import TOLERANCES


def test_tau_examples():
    p = AffinePoint(0, [2])
    assert tau_transition(p, 1, PicardClass(1)) == 2
    assert tau_transition(p, 1, 0) == 1
    assert tau_transition(p, 1, PicardClass(-2)) == pytest.approx(0.25)
    with pytest.raises(OverlapUndefined):
        tau_transition(AffinePoint(0, [0]), 1, 1)


@pytest.mark.parametrize("l", range(-3, 4))
def test_line_cocycle_and_duality(l):
    for p in sample_overlap(3, 1, 2, 30, seed=l + 10):
        q = transition_coords(p, 2)
        r = transition_coords(q, 0)
        prod = tau_transition(p, 2, l) * tau_transition(q, 0, l) * tau_transition(r, 1, l)
        assert abs(prod - 1) <= TOLERANCES["line_cocycle"]
        dual = tau_transition(p, 2, -l) * tau_transition(p, 2, l)
        assert abs(dual - 1) <= TOLERANCES["line_duality"]


def test_picard_group():
    assert PicardClass(3).dual() == PicardClass(-3)
    with pytest.raises(TypeError):
        PicardClass(1.5)


def test_unitary_gauge_is_phase():
    assert abs(unitary_gauge(3 - 4j)) == pytest.approx(1.0)
    assert unitary_gauge(2.0) == pytest.approx(1.0)


def test_monomial_basis_lengths():
    assert len(monomial_basis(1, 1)) == 2
    assert len(monomial_basis(3, 0)) == 1
    assert len(monomial_basis(2, -1)) == 0
    b = monomial_basis(2, 2)
    assert len(set(b.exponents)) == 6
    assert all(sum(e) == 2 for e in b.exponents)
    assert list(b.exponents) == sorted(b.exponents, reverse=True)


def test_section_local_examples():
    s0 = GlobalSection.from_terms(1, 1, {(1, 0): 1})
    s1 = GlobalSection.from_terms(1, 1, {(0, 1): 1})
    s01 = GlobalSection.from_terms(1, 2, {(1, 1): 1})
    assert section_local(s0, AffinePoint(0, [5 + 2j])) == pytest.approx(1)
    assert section_local(s1, AffinePoint(0, [2])) == pytest.approx(2)
    assert section_local(s01, AffinePoint(0, [3])) == pytest.approx(3)


def test_section_transition():
    s0 = GlobalSection.from_terms(1, 1, {(1, 0): 1})
    assert section_transition_residual(s0, AffinePoint(0, [2]), 1) == 0
    s = GlobalSection.from_terms(1, 2, {(2, 0): 1, (0, 2): 1})
    for p in sample_overlap(1, 0, 1, 50, 1):
        assert section_transition_residual(s, p, 1) <= 1e-12 * max(1, abs(section_local(s, p)))
    rng = np.random.default_rng(0)
    s = GlobalSection.random(2, 3, rng)
    res = [section_transition_residual(s, p, 2) for p in sample_overlap(2, 0, 2, 100, 2)]
    scale = [abs(section_local(s, p)) for p in sample_overlap(2, 0, 2, 100, 2)]
    assert max(r / max(1, c) for r, c in zip(res, scale)) <= TOLERANCES["section_transition"]


def test_section_json_round_trip(rng):
    s = GlobalSection.random(2, 2, rng)
    data = json.loads(json.dumps(s.to_json()))
    assert data["n"] == 2 and data["l"] == 2
    t = GlobalSection.from_json(data)
    assert np.array_equal(t.coefficients, s.coefficients)

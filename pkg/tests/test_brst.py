import random

import pytest

from bfvkit.algebra import Element, mono_poscount, truncate
from bfvkit.brst import (
    Charge, MasterEquationError, brst_charge, cme_check, d_R_apply, q0_charge,
)
from bfvkit.poisson import bracket
from bfvkit.properties import random_element
from bfvkit.tate import ShallowResolution, delta_apply, tate_extend


def test_plane_charge_is_q0(plane):
    R = plane.R
    t = plane.res.table
    mu_es = Element.monomial(t, ["x1", "y2", "e1_1*"]) - Element.monomial(t, ["x2", "y1", "e1_1*"])
    assert R == Element(mu_es.terms, t, 4)
    assert plane.charge.steps == []
    assert not bracket(R, R)


def test_so3_charge_structure(so3):
    ch = so3.charge
    assert not cme_check(ch.R, 4)
    assert len(ch.steps) == 1
    q1 = ch.R - q0_charge(so3.res, 4)
    assert q1
    assert all(mono_poscount(m) >= 2 for m in q1.terms)
    # Q1 carries the structure constants of so(3): one term e_k e_i* e_j* per cyclic (i, j, k)
    t = so3.res.table
    expected = Element.zero(t)
    for i, j, k in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        expected = expected + Element.monomial(t, [f"e1_{k}", f"e1_{i}*", f"e1_{j}*"])
    assert q1 == Element(expected.terms, t, 4) or q1 == -Element(expected.terms, t, 4)


def test_charge_reproduces_delta_on_ghosts(so3):
    R, res = so3.R, so3.res
    for g in res.ghosts():
        if g[1] >= 4:
            continue
        img = d_R_apply(R, Element.gen(res.table, g, 4), 4)
        low = img.filter(lambda m: mono_poscount(m) == 0)
        assert low == Element(delta_apply(res, Element.gen(res.table, g)).terms, res.table, low.N)


def test_d_R_squares_to_zero(so3):
    rng = random.Random(5)
    R = so3.R
    for _ in range(40):
        x = random_element(rng, R.table, rng.randint(0, 2), 4, D=1)
        once = d_R_apply(R, Element(x.terms, x.table, 4), 4)
        twice = d_R_apply(R, once, 4)
        assert not twice


def test_q0_needs_a_deep_enough_resolution(so3):
    with pytest.raises(ShallowResolution):
        q0_charge(so3.koszul, 4)


def test_truncation_orders(plane):
    for N in (2, 3, 5):
        ch = brst_charge(tate_extend(plane.res, N - 1), N)
        assert not cme_check(ch.R, N)


def test_cme_check_and_dR_reject_bad_charges(so3):
    t = so3.res.table
    bad = Element.monomial(t, ["x1", "e1_1*"], N=4) + Element.monomial(t, ["p1", "e1_2*"], N=4)
    assert cme_check(bad, 4)
    with pytest.raises(MasterEquationError):
        d_R_apply(bad, Element.gen(t, "x1", 4), 4)


def test_charge_file_round_trip(so3):
    text = so3.charge.dumps()
    back = Charge.loads(text)
    assert back.R == so3.R and back.dumps() == text and not back.residual


def test_precision_loss_on_negative_degrees(plane):
    R = plane.R
    e = Element.gen(R.table, "e1_1", 4)
    out = d_R_apply(R, e, 4)
    assert out.N == 3
    assert truncate(out, 1) == Element(plane.res.images[e.table.gen("e1_1")].terms, R.table, 1)

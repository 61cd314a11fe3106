import os
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from bfvkit.algebra import GeneratorTable
from bfvkit.groebner import (
    CacheIntegrityError, PolyIdeal, PolyRing, buchberger, cached_ideal, divide, element_to_poly,
    ideal_cache_key, padd, pmul, poly_to_element, s_polynomials_reduce,
)
from bfvkit.linalg import Echelon

RING = PolyRing(("x1", "x2", "y1", "y2"))
MU = "x1*y2 - x2*y1"


def P(text, ring=RING):
    return ring.parse(text)


def combine(coeffs, gens):
    out = {}
    for c, g in zip(coeffs, gens):
        out = padd(out, pmul(c, g))
    return out


def sympy_basis(gens, ring):
    syms = sympy.symbols(ring.names)
    order = {"grevlex": "grevlex", "deglex": "grlex", "lex": "lex"}[ring.order]
    exprs = [sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod(s ** k for s, k in zip(syms, e))
                 for e, c in g.items()) for g in gens]
    G = sympy.groebner(exprs, *syms, order=order, domain="QQ")
    return sorted(ring.to_str(ring.parse(str(g))) for g in G.exprs)


def test_principal_and_trivial_bases():
    # the reduced basis of a principal ideal is the monic generator
    assert buchberger([P(MU)], RING).basis == [P("x2*y1 - x1*y2")]
    b = buchberger([P("x1"), P("y1")], RING).basis
    assert sorted(map(RING.to_str, b)) == sorted([RING.to_str(P("x1")), RING.to_str(P("y1"))])
    assert buchberger([], RING).is_zero()


def test_normal_form_examples():
    I = buchberger([P(MU)], RING)
    assert not I.normal_form(P(MU))
    assert I.normal_form(P("1")) == P("1")
    # under grevlex the leading term of mu is -x2*y1, so x1*y2 is already reduced
    assert I.normal_form(P("x1*y2")) == P("x1*y2")
    for order in ("lex", "deglex"):
        ring = PolyRing(RING.names, order)
        J = buchberger([P(MU, ring)], ring)
        assert J.normal_form(P("x1*y2", ring)) == P("x2*y1", ring)


def test_lift_certificates():
    I = buchberger([P(MU)], RING)
    assert I.lift(pmul(P(MU), P("x1"))) == [P("x1")]
    assert I.lift({}) == [{}]
    assert I.lift(P("1")) is None


@pytest.mark.parametrize("order", ["grevlex", "deglex", "lex"])
def test_against_sympy_on_random_ideals(order):
    rng = random.Random(order)
    ring = PolyRing(("a", "b", "c"), order)
    monos = [(i, j, k) for i in range(3) for j in range(3) for k in range(3) if 0 < i + j + k <= 2]
    for _ in range(15):
        gens = []
        for _ in range(rng.randint(1, 3)):
            g = {m: Fraction(rng.randint(-3, 3)) for m in rng.sample(monos, 3)}
            g = {m: c for m, c in g.items() if c}
            if g:
                gens.append(g)
        if not gens:
            continue
        I = buchberger(gens, ring)
        assert sorted(ring.to_str(b) for b in I.basis) == sympy_basis(gens, ring)
        assert s_polynomials_reduce(I)
        for b, t in zip(I.basis, I.transcripts):
            assert combine(t, gens) == b
        for s in I.syzygies():
            assert not combine(s, gens)


def test_so3_syzygies_contain_the_rotation_syzygies():
    ring = PolyRing(("x1", "x2", "x3", "p1", "p2", "p3"))
    gens = [P(s, ring) for s in ("x2*p3 - x3*p2", "x3*p1 - x1*p3", "x1*p2 - x2*p1")]
    I = buchberger(gens, ring)
    syz = I.syzygies()
    assert syz
    for s in syz:
        assert not combine(s, gens)
    # module membership within polynomial multipliers of degree <= 1
    mults = [{}] + [ring.var(i) for i in range(6)]
    mults[0] = ring.one()
    ech = Echelon()
    for k, s in enumerate(syz):
        for j, m in enumerate(mults):
            vec = {}
            for i, comp in enumerate(s):
                for e, c in pmul(comp, m).items():
                    vec[(i, e)] = vec.get((i, e), 0) + c
            ech.add((k, j), {r: c for r, c in vec.items() if c})
    for target in (["x1", "x2", "x3"], ["p1", "p2", "p3"]):
        vec = {}
        for i, t in enumerate(target):
            for e, c in P(t, ring).items():
                vec[(i, e)] = c
        assert ech.solve(vec) is not None


def test_regular_element_has_no_syzygies():
    assert buchberger([P(MU)], RING).syzygies() == []
    ring = PolyRing(("x", "y"))
    (s,) = buchberger([P("x", ring), P("y", ring)], ring).syzygies()
    assert not combine(s, [P("x", ring), P("y", ring)])


small = st.dictionaries(
    st.tuples(*[st.integers(0, 2)] * 4), st.fractions(min_value=-3, max_value=3, max_denominator=3),
    max_size=4,
).map(lambda d: {e: Fraction(c) for e, c in d.items() if c})


@given(small, small, small)
@settings(max_examples=100, deadline=None)
def test_normal_form_is_linear_and_kills_the_ideal(f, g, q):
    I = buchberger([P(MU), P("x1^2 - y2")], RING)
    nf = I.normal_form
    assert nf(padd(f, g)) == nf(padd(nf(f), nf(g)))
    assert nf(padd(pmul(q, I.gens[0]), f)) == nf(f)
    assert nf(nf(f)) == nf(f)
    diff = padd(f, nf(f), -1)
    cert = I.lift(diff)
    assert cert is not None and combine(cert, I.gens) == diff


def test_division_remainder_has_no_divisible_terms():
    I = buchberger([P(MU), P("x1^2 - y2")], RING)
    f = P("x1^3*y2 + x2*y1*y2 + 7")
    q, r = divide(f, I.basis, RING.key)
    assert padd(combine(q, I.basis), r) == f


def test_cache_round_trip_and_integrity(tmp_path):
    gens = [P(MU), P("x1^2 - y2")]
    I = cached_ideal(gens, RING, str(tmp_path))
    path = tmp_path / f"ideal-{ideal_cache_key(gens, RING)}.txt"
    assert path.exists()
    J = cached_ideal(gens, RING, str(tmp_path))
    assert J.basis == I.basis and J.transcripts == I.transcripts and J.syzygies() == I.syzygies()
    assert PolyIdeal.loads(I.dumps()).dumps() == I.dumps()
    text = path.read_text()
    path.write_text(text.replace("x1", "x2", 1))
    with pytest.raises(CacheIntegrityError):
        cached_ideal(gens, RING, str(tmp_path))
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp")]


def test_parse_errors_and_element_conversion():
    with pytest.raises(ValueError, match="unknown variables"):
        P("x1*z")
    with pytest.raises(ValueError):
        P("x1 +* 2")
    table = GeneratorTable(2)
    f = P("3*x1^2*y2 - 1/2")
    assert element_to_poly(poly_to_element(f, table)) == f

from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from bfvkit.algebra import (
    ANTI, GHOST, X, Y, Element, GeneratorTable, TableMismatch, gen_degree, gen_odd, mono_degree,
    mono_mul, mono_weight, normalize, truncate, words_of_degree, x_slice,
)

T = GeneratorTable(2, (2, 1, 1))


def koszul_sign(word):
    """Sign of sorting ``word`` into canonical order, by counting odd transpositions."""
    w = list(word)
    sign = 1
    for i in range(len(w)):
        for j in range(len(w) - 1 - i):
            if w[j] > w[j + 1]:
                if gen_odd(w[j]) and gen_odd(w[j + 1]):
                    sign = -sign
                w[j], w[j + 1] = w[j + 1], w[j]
    for a, b in zip(w, w[1:]):
        if a == b and gen_odd(a):
            return 0
    return sign


gens = st.sampled_from(T.generators())


def test_generator_degrees_and_parity():
    assert gen_degree((X, 0, 1)) == 0 and gen_degree((Y, 0, 1)) == 0
    assert gen_degree((GHOST, 3, 1)) == -3 and gen_degree((ANTI, 3, 1)) == 3
    assert gen_odd((GHOST, 1, 1)) and not gen_odd((GHOST, 2, 1)) and gen_odd((ANTI, 3, 1))


def test_names_round_trip():
    for g in T.generators():
        assert T.gen(T.name(g)) == g
    assert T.name((ANTI, 2, 1)) == "e2_1*"
    with pytest.raises(KeyError):
        T.gen("e5_1")


def test_header_round_trip():
    t = GeneratorTable(3, (3, 2), "x", "p")
    assert GeneratorTable.from_header(t.header()) == t


def test_odd_square_vanishes():
    e = Element.gen(T, "e1_1")
    assert not e * e
    f = Element.gen(T, "e2_1")
    assert f * f


@given(st.lists(gens, min_size=0, max_size=6))
@settings(max_examples=200, deadline=None)
def test_normalize_sign_matches_transposition_count(word):
    sign, mono = normalize(word)
    assert sign == koszul_sign(word)
    if sign:
        assert mono_degree(mono) == sum(gen_degree(g) for g in word)


@given(st.lists(gens, max_size=4), st.lists(gens, max_size=4))
@settings(max_examples=200, deadline=None)
def test_supercommutativity(u, v):
    a = Element.monomial(T, u)
    b = Element.monomial(T, v)
    da = sum(gen_degree(g) for g in u)
    db = sum(gen_degree(g) for g in v)
    assert a * b == (b * a).scale(-1 if (da * db) % 2 else 1)


@given(st.lists(gens, max_size=3), st.lists(gens, max_size=3), st.lists(gens, max_size=3))
@settings(max_examples=100, deadline=None)
def test_associativity(u, v, w):
    a, b, c = (Element.monomial(T, x) for x in (u, v, w))
    assert (a * b) * c == a * (b * c)


def test_mono_mul_agrees_with_normalize():
    words = [((GHOST, 1, 1),), ((ANTI, 1, 2), (X, 0, 1)), ((GHOST, 1, 2), (ANTI, 1, 1))]
    for a in words:
        for b in words:
            sa, ma = normalize(a)
            sb, mb = normalize(b)
            s, m = mono_mul(ma, mb)
            s2, m2 = normalize(a + b)
            assert s * sa * sb == s2 and (not s2 or m == m2)


def test_weight_counts_antighosts_and_ghosts():
    e = Element.monomial(T, ["x1", "e2_1*", "e1_1"]).terms
    (m,) = e
    assert mono_weight(m) == 2


def test_truncation():
    a = Element.monomial(T, ["e1_1*"]) + Element.monomial(T, ["e1_1*", "e1_2*"])
    t = truncate(a, 2)
    assert len(t) == 1 and t.N == 2


def test_table_mismatch():
    other = GeneratorTable(3)
    with pytest.raises(TableMismatch):
        Element.gen(T, "x1") + Element.gen(other, "x3")


def test_text_round_trip_and_errors():
    a = Element.monomial(T, ["x1", "e2_1*", "e1_1"], Fraction(-3, 4)) + Element.gen(T, "y2")
    assert Element.from_text(a.to_text(), T) == a
    with pytest.raises(ValueError, match="line 2, column 10: unknown generator"):
        Element.from_text("1/1 * x1\n1/2 * x1 q7\n", T)
    with pytest.raises(ValueError, match="line 1"):
        Element.from_text("x1 y1", T)


def test_words_of_degree():
    ghosts = T.ghosts()
    for total in range(0, 5):
        for w in words_of_degree(ghosts, total):
            assert -sum(gen_degree(g) * e for g, e in w) == total


def test_x_slice_degrees_and_weights():
    for k in (-2, 0, 1):
        for m in x_slice(T, k, 4, 1):
            assert mono_degree(m) == k and mono_weight(m) < 4


def test_all_orderings_of_a_word_agree_up_to_sign():
    word = [(GHOST, 1, 1), (ANTI, 2, 1), (X, 0, 1), (ANTI, 1, 2)]
    ref = Element.monomial(T, word)
    for perm in permutations(word):
        s = koszul_sign(perm) * koszul_sign(word)
        assert Element.monomial(T, perm) == ref.scale(s)

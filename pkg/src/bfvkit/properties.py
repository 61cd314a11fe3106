"""Randomized property checks shared by the test-suite and ``bfvkit selftest``.

Each ``check_*`` function returns the number of samples examined and raises
AssertionError with a witness on the first failure.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from .algebra import (
    Element, GeneratorTable, mono_weight, p_monomials, words_of_degree, x_slice,
)
from .poisson import bracket, filtration_bound, jacobiator
from .quantize import normal_order, q_inv, q_map, qbracket_over_hbar, qmul
from .tate import delta_apply, pibar


def default_table():
    """Two symplectic pairs with ghosts in degrees -1..-3, both parities."""
    return GeneratorTable(2, (2, 1, 1))


@lru_cache(maxsize=None)
def _candidates(table, degree, N, D):
    return tuple(x_slice(table, degree, N, D))


def random_element(rng, table, degree, N, D=2, terms=3, min_weight=0):
    """Random homogeneous element with monomials of weight in [min_weight, N).

    The result is an exact (untruncated) polynomial: brackets do not respect
    truncation in general, so identities are checked on representatives.
    """
    cands = [m for m in _candidates(table, degree, N, D) if mono_weight(m) >= min_weight]
    if not cands:
        return Element.zero(table)
    picks = rng.sample(cands, min(terms, len(cands)))
    return Element({m: Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2])) for m in picks},
                   table)


def _degree(rng, lo=-2, hi=3):
    return rng.randint(lo, hi)


def _sign(n):
    return -1 if n & 1 else 1


def check_jacobi(rng, trials, table=None, N=6):
    table = table or default_table()
    for _ in range(trials):
        a, b, c = (random_element(rng, table, _degree(rng), N) for _ in range(3))
        j = jacobiator(a, b, c)
        assert not j, f"Jacobi fails on {a}, {b}, {c}: {j}"
    return trials


def check_leibniz(rng, trials, table=None, N=6):
    table = table or default_table()
    for _ in range(trials):
        a, b, c = (random_element(rng, table, _degree(rng), N) for _ in range(3))
        da, db = a.degree() or 0, b.degree() or 0
        lhs = bracket(a, b * c)
        rhs = bracket(a, b) * c + (b * bracket(a, c)) * _sign(da * db)
        assert lhs == rhs, f"Leibniz fails on {a}, {b}, {c}"
    return trials


def check_skew(rng, trials, table=None, N=6):
    table = table or default_table()
    for _ in range(trials):
        a, b = (random_element(rng, table, _degree(rng), N) for _ in range(2))
        da, db = a.degree() or 0, b.degree() or 0
        assert bracket(a, b) == -bracket(b, a) * _sign(da * db)
    return trials


def check_filtration(rng, trials, table=None, N=7):
    """Weight of ``{a, b}`` is at least the bound for ``a in F^p X^n``, ``b in F^q X^m``."""
    table = table or default_table()
    done = 0
    while done < trials:
        n, m = _degree(rng), _degree(rng)
        p, q = rng.randint(0, 3), rng.randint(0, 3)
        a = random_element(rng, table, n, N, min_weight=p)
        b = random_element(rng, table, m, N, min_weight=q)
        if not a or not b:
            continue
        ab = bracket(a, b)
        bound = filtration_bound(n, m, p, q)
        w = ab.min_weight()
        assert w is None or w >= bound, f"weight {w} < {bound} for degrees {n},{m} filtrations {p},{q}"
        done += 1
    return done


def check_homotopy(rng, trials, res, hom, D=2):
    """``delta s + s delta = 1 - pibar`` on random elements of the slices of T.

    Degrees run down to the last one whose acyclicity the resolution verified.
    """
    table = res.table
    ghosts = table.ghosts()
    lowest = table.depth + 1 if res.complete else res.extent - 1
    done = 0
    while done < trials:
        d = -rng.randint(0, max(lowest, 0))
        words = words_of_degree(ghosts, -d)
        if not words:
            continue
        terms = {}
        for _ in range(rng.randint(1, 3)):
            gw = rng.choice(words)
            k = rng.randint(0, D) if table.n_pairs else 0
            p = rng.choice(p_monomials(table.n_pairs, k))
            terms[p + gw] = Fraction(rng.randint(-4, 4) or 1)
        t = Element(terms, table)
        lhs = delta_apply(res, hom(t)) + hom(delta_apply(res, t))
        rhs = t - pibar(res, t)
        assert lhs == rhs, f"homotopy identity fails on {t}"
        done += 1
    return done


def random_word(rng, table, length):
    gens = table.generators()
    return tuple(rng.choice(gens) for _ in range(length))


def check_confluence(rng, trials, table=None, max_len=8, strategies=3):
    table = table or default_table()
    for _ in range(trials):
        w = random_word(rng, table, rng.randint(1, max_len))
        ref = normal_order(w, table)
        for _ in range(strategies):
            other = normal_order(w, table, rng=random.Random(rng.random()))
            assert other == ref, f"rewriting is not confluent on {w}"
    return trials


def check_semiclassical(rng, trials, table=None, N=6):
    """Modulo hbar, the quantum product and bracket reduce to the classical ones."""
    table = table or default_table()
    for _ in range(trials):
        a, b = (random_element(rng, table, _degree(rng), N) for _ in range(2))
        qa, qb = q_map(a, 1), q_map(b, 1)
        assert q_inv(qmul(qa, qb)) == a * b, f"product limit fails on {a}, {b}"
        assert q_inv(qbracket_over_hbar(qa, qb)) == bracket(a, b), f"bracket limit fails on {a}, {b}"
    return trials

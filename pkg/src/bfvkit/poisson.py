"""The graded Poisson bracket induced by the symplectic pairing.

Basic brackets: ``{x_i, y_j} = delta_ij`` and ``{e, e*} = 1`` for a ghost ``e``;
the reversed pairings follow from graded skew-symmetry.
"""
from __future__ import annotations

from functools import lru_cache

from .algebra import (
    GHOST, X, Y, Element, _join_N, _join_tables, dual, left_derivative, mono_mul, mono_weight,
    right_derivative,
)


def pairing(u, v):
    """The constant ``{u, v}`` for generators ``u, v``."""
    if v != dual(u):
        return 0
    kind, l, _ = u
    if kind == X or kind == GHOST:
        return 1
    if kind == Y:
        return -1
    # {e*, e} = -(-1)^{|e*||e|} {e, e*}
    return -1 if l % 2 == 0 else 1


@lru_cache(maxsize=1 << 20)
def mono_bracket(ma, mb):
    """``{ma, mb}`` as a tuple of (monomial, integer coefficient)."""
    out = {}
    partners = {g for g, _ in mb}
    for u, _ in ma:
        v = dual(u)
        if v not in partners:
            continue
        cr, ra = right_derivative(ma, u)
        cl, rb = left_derivative(mb, v)
        sign, m = mono_mul(ra, rb)
        if not sign:
            continue
        out[m] = out.get(m, 0) + sign * cr * cl * pairing(u, v)
    return tuple((m, c) for m, c in out.items() if c)


def bracket(a, b):
    """``{a, b}``, truncated at the joint order of ``a`` and ``b``."""
    table = _join_tables(a.table, b.table)
    N = _join_N(a.N, b.N)
    out = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            for m, k in mono_bracket(ma, mb):
                if N is not None and mono_weight(m) >= N:
                    continue
                v = out.get(m, 0) + k * ca * cb
                if v:
                    out[m] = v
                else:
                    del out[m]
    return Element._raw(out, table, N)


def _sign(n):
    return -1 if n & 1 else 1


def jacobiator(a, b, c):
    """Graded Jacobi expression; vanishes for homogeneous inputs."""
    da, db, dc = a.degree() or 0, b.degree() or 0, c.degree() or 0
    return (
        bracket(a, bracket(b, c)) * _sign(da * dc)
        + bracket(b, bracket(c, a)) * _sign(db * da)
        + bracket(c, bracket(a, b)) * _sign(dc * db)
    )


def filtration_bound(n, m, p, q):
    """Lower bound on the weight of ``{a, b}`` for ``a in F^p X^n``, ``b in F^q X^m``."""
    return max(m + n, min(max(p, q + n), max(q, p + m)))


def precision_loss(n, m):
    """Orders of ``F`` lost when bracketing elements of degree ``n`` and ``m``."""
    return max(abs(n), abs(m))


__all__ = ["bracket", "jacobiator", "filtration_bound", "pairing", "precision_loss"]

"""Buchberger's algorithm over the rationals, with transcripts.

Polynomials are dicts ``exponent tuple -> Fraction`` in a :class:`PolyRing`.
Every basis element remembers how it was built from the input generators,
which gives membership certificates and first syzygies.
"""
from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import sympy

from .algebra import X, Y, Element, mono_ppart


class CacheIntegrityError(RuntimeError):
    pass


def _grevlex(e):
    return (sum(e), tuple(-x for x in reversed(e)))


def _deglex(e):
    return (sum(e), e)


def _lex(e):
    return e


ORDERS = {"grevlex": _grevlex, "degrevlex": _grevlex, "deglex": _deglex, "grlex": _deglex, "lex": _lex}


@dataclass(frozen=True)
class PolyRing:
    names: tuple
    order: str = "grevlex"

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"unknown monomial order {self.order!r}")

    @property
    def nvars(self):
        return len(self.names)

    @property
    def key(self):
        return ORDERS[self.order]

    @classmethod
    def for_table(cls, table, order="grevlex"):
        names = [table.name(g) for g in table.coords() + table.momenta()]
        return cls(tuple(names), order)

    def var(self, i):
        e = [0] * self.nvars
        e[i] = 1
        return {tuple(e): Fraction(1)}

    def one(self):
        return {(0,) * self.nvars: Fraction(1)}

    def parse(self, text):
        """Parse a polynomial with rational coefficients in this ring's variables."""
        syms = sympy.symbols(self.names) if self.names else ()
        local = {n: s for n, s in zip(self.names, syms)} if self.names else {}
        try:
            expr = sympy.parse_expr(text.replace("^", "**"), local_dict=local, evaluate=True)
        except Exception as exc:  # sympy raises a zoo of exception types
            raise ValueError(f"cannot parse polynomial {text!r}: {exc}") from None
        expr = sympy.expand(expr)
        if not self.names:
            if not expr.is_Rational:
                raise ValueError(f"{text!r} is not a constant")
            return {(): Fraction(int(expr.p), int(expr.q))} if expr != 0 else {}
        extra = expr.free_symbols - set(syms)
        if extra:
            raise ValueError(f"unknown variables {sorted(map(str, extra))} in {text!r}")
        poly = sympy.Poly(expr, *syms, domain="QQ")
        out = {}
        for exps, c in poly.terms():
            out[tuple(exps)] = Fraction(int(c.numerator), int(c.denominator))
        return out

    def to_str(self, f):
        if not f:
            return "0"
        parts = []
        for e in sorted(f, key=self.key, reverse=True):
            c = f[e]
            mono = " ".join(
                (n if k == 1 else f"{n}^{k}") for n, k in zip(self.names, e) if k
            )
            parts.append(f"{c.numerator}/{c.denominator} * {mono or '1'}")
        return " + ".join(parts)

    def from_str(self, text):
        text = text.strip()
        if text == "0":
            return {}
        out = {}
        index = {n: i for i, n in enumerate(self.names)}
        for term in text.split(" + "):
            coef, _, body = term.partition(" * ")
            e = [0] * self.nvars
            for tok in body.split():
                if tok == "1":
                    continue
                n, _, k = tok.partition("^")
                e[index[n]] += int(k) if k else 1
            out[tuple(e)] = out.get(tuple(e), 0) + Fraction(coef)
        return {e: c for e, c in out.items() if c}


# ---------------------------------------------------------------------------
# polynomial arithmetic on dicts


def padd(f, g, c=1):
    """``f + c*g``."""
    out = dict(f)
    for e, v in g.items():
        w = out.get(e, 0) + c * v
        if w:
            out[e] = w
        else:
            out.pop(e, None)
    return out


def pmul_term(f, exps, c):
    return {tuple(a + b for a, b in zip(e, exps)): c * v for e, v in f.items()}


def pmul(f, g):
    out = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            w = out.get(e, 0) + c1 * c2
            if w:
                out[e] = w
            else:
                del out[e]
    return out


def pscale(f, c):
    return {e: c * v for e, v in f.items()} if c else {}


def lead(f, key):
    e = max(f, key=key)
    return e, f[e]


def divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def pdeg(f):
    return max((sum(e) for e in f), default=-1)


def is_homogeneous(f):
    return len({sum(e) for e in f}) <= 1


def divide(f, divisors, key):
    """Full multivariate division: ``f = sum q_i g_i + r`` with ``r`` reduced."""
    quotients = [{} for _ in divisors]
    leads = [lead(g, key) for g in divisors]
    r = {}
    p = dict(f)
    while p:
        e, c = lead(p, key)
        for i, (le, lc) in enumerate(leads):
            if divides(le, e):
                shift = tuple(a - b for a, b in zip(e, le))
                t = c / lc
                quotients[i][shift] = quotients[i].get(shift, 0) + t
                p = padd(p, pmul_term(divisors[i], shift, t), -1)
                break
        else:
            r[e] = c
            del p[e]
    return quotients, r


def _spair(f, g, key):
    (ef, cf), (eg, cg) = lead(f, key), lead(g, key)
    lcm = tuple(max(a, b) for a, b in zip(ef, eg))
    mf = tuple(a - b for a, b in zip(lcm, ef))
    mg = tuple(a - b for a, b in zip(lcm, eg))
    return mf, Fraction(1) / cf, mg, Fraction(1) / cg


# ---------------------------------------------------------------------------


@dataclass
class PolyIdeal:
    """An ideal with a reduced Gröbner basis and its transcripts.

    ``transcripts[k][i]`` is the coefficient of ``gens[i]`` in ``basis[k]``.
    """

    ring: PolyRing
    gens: list
    basis: list
    transcripts: list
    _syz: list = field(default=None, repr=False)

    @property
    def key(self):
        return self.ring.key

    def is_zero(self):
        return not self.basis

    def normal_form(self, f):
        if not self.basis:
            return dict(f)
        return divide(f, self.basis, self.key)[1]

    def contains(self, f):
        return not self.normal_form(f)

    def lift(self, f):
        """Coefficients ``a`` with ``sum a_i gens[i] = f``, or None if ``f`` is not in the ideal."""
        if not f:
            return [{} for _ in self.gens]
        if not self.basis:
            return None
        q, r = divide(f, self.basis, self.key)
        if r:
            return None
        coeffs = [{} for _ in self.gens]
        for k, qk in enumerate(q):
            if not qk:
                continue
            for i, t in enumerate(self.transcripts[k]):
                if t:
                    coeffs[i] = padd(coeffs[i], pmul(qk, t))
        return coeffs

    def syzygies(self):
        if self._syz is None:
            self._syz = _syzygies(self)
        return self._syz

    # cache format
    def dumps(self):
        r = self.ring
        lines = [
            "# polynomial ideal",
            "vars " + " ".join(r.names),
            f"order {r.order}",
            f"gens {len(self.gens)}",
        ]
        lines += [r.to_str(g) for g in self.gens]
        lines.append(f"basis {len(self.basis)}")
        for g, t in zip(self.basis, self.transcripts):
            lines.append(r.to_str(g))
            lines += ["  " + r.to_str(c) for c in t]
        syz = self.syzygies()
        lines.append(f"syzygies {len(syz)}")
        for s in syz:
            lines += ["  " + r.to_str(c) for c in s]
            lines.append("  ;")
        body = "\n".join(lines) + "\n"
        digest = hashlib.sha256(body.encode()).hexdigest()
        return body + f"checksum {digest}\n"

    @classmethod
    def loads(cls, text):
        body, _, tail = text.rpartition("checksum ")
        if not tail.strip() or hashlib.sha256(body.encode()).hexdigest() != tail.strip():
            raise CacheIntegrityError("ideal cache checksum mismatch")
        lines = body.splitlines()
        names = tuple(lines[1].split()[1:])
        ring = PolyRing(names, lines[2].split()[1])
        pos = 3
        ng = int(lines[pos].split()[1])
        gens = [ring.from_str(s) for s in lines[pos + 1: pos + 1 + ng]]
        pos += 1 + ng
        nb = int(lines[pos].split()[1])
        pos += 1
        basis, transcripts = [], []
        for _ in range(nb):
            basis.append(ring.from_str(lines[pos]))
            transcripts.append([ring.from_str(s) for s in lines[pos + 1: pos + 1 + ng]])
            pos += 1 + ng
        nsyz = int(lines[pos].split()[1])
        pos += 1
        syz = []
        for _ in range(nsyz):
            vec = []
            while lines[pos].strip() != ";":
                vec.append(ring.from_str(lines[pos]))
                pos += 1
            pos += 1
            syz.append(vec)
        return cls(ring, gens, basis, transcripts, syz)


def buchberger(gens, ring):
    """Reduced Gröbner basis of the ideal generated by ``gens``, with transcripts."""
    key = ring.key
    k = len(gens)
    basis, trans = [], []
    for i, g in enumerate(gens):
        if g:
            t = [{} for _ in range(k)]
            t[i] = {(0,) * ring.nvars: Fraction(1)}
            basis.append(dict(g))
            trans.append(t)
    pairs = list(combinations(range(len(basis)), 2))
    while pairs:
        i, j = pairs.pop(0)
        ei, ej = lead(basis[i], key)[0], lead(basis[j], key)[0]
        if all(a == 0 or b == 0 for a, b in zip(ei, ej)):
            continue  # coprime leading monomials: S-polynomial reduces to zero
        mi, ci, mj, cj = _spair(basis[i], basis[j], key)
        s = padd(pmul_term(basis[i], mi, ci), pmul_term(basis[j], mj, cj), -1)
        q, r = divide(s, basis, key)
        if not r:
            continue
        t = [
            padd(pmul_term(a, mi, ci), pmul_term(b, mj, cj), -1)
            for a, b in zip(trans[i], trans[j])
        ]
        for idx, qk in enumerate(q):
            if qk:
                t = [padd(tv, pmul(qk, tk), -1) for tv, tk in zip(t, trans[idx])]
        basis.append(r)
        trans.append(t)
        n = len(basis) - 1
        pairs.extend((m, n) for m in range(n))
    basis, trans = _interreduce(basis, trans, key)
    order = sorted(range(len(basis)), key=lambda i: key(lead(basis[i], key)[0]))
    return PolyIdeal(ring, [dict(g) for g in gens], [basis[i] for i in order], [trans[i] for i in order])


def _interreduce(basis, trans, key):
    # drop elements whose leading monomial is divisible by another's
    keep = []
    leads = [lead(g, key)[0] for g in basis]
    for i, li in enumerate(leads):
        redundant = False
        for j, lj in enumerate(leads):
            if j != i and divides(lj, li) and (lj != li or j < i):
                redundant = True
                break
        if not redundant:
            keep.append(i)
    basis = [basis[i] for i in keep]
    trans = [trans[i] for i in keep]
    out_b, out_t = [], []
    for i in range(len(basis)):
        others = basis[:i] + basis[i + 1:]
        others_t = trans[:i] + trans[i + 1:]
        q, r = divide(basis[i], others, key) if others else ([], dict(basis[i]))
        t = trans[i]
        for idx, qk in enumerate(q):
            if qk:
                t = [padd(tv, pmul(qk, tk), -1) for tv, tk in zip(t, others_t[idx])]
        lc = lead(r, key)[1]
        out_b.append(pscale(r, 1 / lc))
        out_t.append([pscale(tv, 1 / lc) for tv in t])
    # a second pass is not needed: leading terms are pairwise non-dividing,
    # so tails reduced against the old basis stay reduced against the new one
    return out_b, out_t


def _syzygies(ideal):
    """Generators of the first syzygy module of ``ideal.gens``."""
    key = ideal.key
    k = len(ideal.gens)
    basis, A = ideal.basis, ideal.transcripts
    nb = len(basis)
    out = []
    # Schreyer: each S-pair of the basis reduces to zero
    for i, j in combinations(range(nb), 2):
        mi, ci, mj, cj = _spair(basis[i], basis[j], key)
        s = padd(pmul_term(basis[i], mi, ci), pmul_term(basis[j], mj, cj), -1)
        q, r = divide(s, basis, key)
        assert not r, "basis is not a Gröbner basis"
        vec = [{} for _ in range(nb)]
        vec[i] = padd(vec[i], {mi: ci})
        vec[j] = padd(vec[j], {mj: cj}, -1)
        for idx, qk in enumerate(q):
            vec[idx] = padd(vec[idx], qk, -1)
        out.append(_transport(vec, A, k))
    # gens expressed through the basis: columns of (I - A B)
    for i, g in enumerate(ideal.gens):
        if not g:
            vec = [{} for _ in range(k)]
            vec[i] = {(0,) * ideal.ring.nvars: Fraction(1)}
            out.append(vec)
            continue
        q, r = divide(g, basis, key)
        assert not r
        vec = _transport(q, A, k)
        vec = [pscale(v, -1) for v in vec]
        vec[i] = padd(vec[i], {(0,) * ideal.ring.nvars: Fraction(1)})
        out.append(vec)
    return _prune_syzygies(out, key)


def _transport(vec, A, k):
    res = [{} for _ in range(k)]
    for b, coeff in enumerate(vec):
        if coeff:
            for i in range(k):
                if A[b][i]:
                    res[i] = padd(res[i], pmul(coeff, A[b][i]))
    return res


def _prune_syzygies(vectors, key):
    seen = set()
    out = []
    for v in vectors:
        if not any(v):
            continue
        first = next(c for c in v if c)
        lc = lead(first, key)[1]
        v = [pscale(c, 1 / lc) for c in v]
        sig = tuple(tuple(sorted(c.items())) for c in v)
        if sig in seen:
            continue
        seen.add(sig)
        out.append(v)
    out.sort(key=lambda v: (max(pdeg(c) for c in v), [sorted(c.items()) for c in v]))
    return out


def s_polynomials_reduce(ideal):
    """True when every S-polynomial of the basis reduces to zero."""
    key = ideal.key
    for i, j in combinations(range(len(ideal.basis)), 2):
        mi, ci, mj, cj = _spair(ideal.basis[i], ideal.basis[j], key)
        s = padd(pmul_term(ideal.basis[i], mi, ci), pmul_term(ideal.basis[j], mj, cj), -1)
        if divide(s, ideal.basis, key)[1]:
            return False
    return True


# ---------------------------------------------------------------------------
# conversion to and from algebra elements


def poly_to_element(f, table, N=None):
    n = table.n_pairs
    terms = {}
    for e, c in f.items():
        m = tuple(((X, 0, i + 1), k) for i, k in enumerate(e[:n]) if k)
        m += tuple(((Y, 0, i + 1), k) for i, k in enumerate(e[n:]) if k)
        terms[m] = c
    return Element(terms, table, N)


def mono_to_exps(m, n):
    e = [0] * (2 * n)
    for (kind, _, j), k in m:
        e[(j - 1) if kind == X else (n + j - 1)] += k
    return tuple(e)


def element_to_poly(a):
    """The symplectic polynomial of an element without ghost factors."""
    n = a.table.n_pairs
    out = {}
    for m, c in a.terms.items():
        p, rest = mono_ppart(m)
        if rest:
            raise ValueError("element has ghost or antighost factors")
        out[mono_to_exps(p, n)] = c
    return out


# ---------------------------------------------------------------------------
# disk cache


def ideal_cache_key(gens, ring):
    text = ring.order + "|" + " ".join(ring.names) + "|" + "|".join(ring.to_str(g) for g in gens)
    return hashlib.sha256(text.encode()).hexdigest()[:24]


def atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cached_ideal(gens, ring, cache_dir=None):
    """Build (or load from ``cache_dir``) the Gröbner data for ``gens``."""
    if cache_dir is None:
        return buchberger(gens, ring)
    path = os.path.join(cache_dir, f"ideal-{ideal_cache_key(gens, ring)}.txt")
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return PolyIdeal.loads(fh.read())
    ideal = buchberger(gens, ring)
    atomic_write(path, ideal.dumps())
    return ideal


def ideal_for_table(table, constraints, order="grevlex"):
    ring = PolyRing.for_table(table, order)
    gens = [ring.parse(c) if isinstance(c, str) else c for c in constraints]
    return buchberger(gens, ring)


__all__ = [
    "PolyRing", "PolyIdeal", "buchberger", "divide", "cached_ideal", "CacheIntegrityError",
    "poly_to_element", "element_to_poly", "s_polynomials_reduce",
]

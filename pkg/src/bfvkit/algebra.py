"""Graded super-commutative polynomial algebra over the rationals.

The algebra is generated by symplectic pairs ``x_i, y_i`` (degree 0), ghosts
``e{l}_{j}`` of degree ``-l`` and their dual antighosts ``e{l}_{j}*`` of degree
``+l``.  Generators of odd degree anticommute and square to zero.

A generator is the tuple ``(kind, l, j)``; sorting these tuples gives the
global generator order (x's, y's, ghosts by degree then index, antighosts
likewise).  A monomial is a sorted tuple of ``(generator, exponent)`` pairs.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from bisect import bisect_right
import re

X, Y, GHOST, ANTI = 0, 1, 2, 3

ONE = ()  # the unit monomial


class TableMismatch(ValueError):
    pass


class TruncationMismatch(ValueError):
    pass


def gen_degree(g):
    kind, l, _ = g
    if kind == GHOST:
        return -l
    if kind == ANTI:
        return l
    return 0


def gen_odd(g):
    return g[0] >= GHOST and g[1] & 1 == 1


def dual(g):
    """The generator paired with ``g`` by the bracket."""
    kind, l, j = g
    return ({X: Y, Y: X, GHOST: ANTI, ANTI: GHOST}[kind], l, j)


@dataclass(frozen=True)
class GeneratorTable:
    """Symplectic pairs plus a finite number of ghosts in each negative degree.

    ``ghost_counts[l-1]`` is the number of ghosts of degree ``-l``.
    """

    n_pairs: int = 0
    ghost_counts: tuple = ()
    coord: str = "x"
    momentum: str = "y"

    def __post_init__(self):
        counts = tuple(int(c) for c in self.ghost_counts)
        while counts and counts[-1] == 0:
            counts = counts[:-1]
        if any(c < 0 for c in counts) or self.n_pairs < 0:
            raise ValueError("negative generator count")
        if self.coord == self.momentum:
            raise ValueError("coordinate and momentum names must differ")
        object.__setattr__(self, "ghost_counts", counts)

    @property
    def depth(self):
        return len(self.ghost_counts)

    def count(self, l):
        return self.ghost_counts[l - 1] if 1 <= l <= len(self.ghost_counts) else 0

    def coords(self):
        return [(X, 0, i) for i in range(1, self.n_pairs + 1)]

    def momenta(self):
        return [(Y, 0, i) for i in range(1, self.n_pairs + 1)]

    def ghosts(self, l=None):
        levels = range(1, self.depth + 1) if l is None else [l]
        return [(GHOST, k, j) for k in levels for j in range(1, self.count(k) + 1)]

    def antighosts(self, l=None):
        return [dual(g) for g in self.ghosts(l)]

    def generators(self):
        return self.coords() + self.momenta() + self.ghosts() + self.antighosts()

    def __contains__(self, g):
        kind, l, j = g
        if kind in (X, Y):
            return l == 0 and 1 <= j <= self.n_pairs
        return 1 <= j <= self.count(l)

    def name(self, g):
        kind, l, j = g
        if kind == X:
            return f"{self.coord}{j}"
        if kind == Y:
            return f"{self.momentum}{j}"
        return f"e{l}_{j}" + ("*" if kind == ANTI else "")

    def gen(self, name):
        g = _parse_name(name, self.coord, self.momentum)
        if g is None or g not in self:
            raise KeyError(f"unknown generator {name!r}")
        return g

    def with_ghosts(self, l, count):
        """Table with ``count`` extra ghosts of degree ``-l``; returns (table, new ghosts)."""
        counts = list(self.ghost_counts) + [0] * max(0, l - self.depth)
        start = counts[l - 1]
        counts[l - 1] += count
        table = GeneratorTable(self.n_pairs, tuple(counts), self.coord, self.momentum)
        return table, [(GHOST, l, start + k) for k in range(1, count + 1)]

    def issubtable(self, other):
        return (
            self.n_pairs == other.n_pairs
            and self.coord == other.coord
            and self.momentum == other.momentum
            and all(self.count(l) <= other.count(l) for l in range(1, self.depth + 1))
        )

    def header(self):
        counts = ",".join(str(c) for c in self.ghost_counts)
        return f"pairs={self.n_pairs} ghosts=[{counts}] names={self.coord},{self.momentum}"

    @classmethod
    def from_header(cls, text):
        m = re.fullmatch(r"pairs=(\d+) ghosts=\[([\d,]*)\] names=(\w+),(\w+)", text.strip())
        if not m:
            raise ValueError(f"bad table header {text!r}")
        counts = tuple(int(c) for c in m.group(2).split(",") if c)
        return cls(int(m.group(1)), counts, m.group(3), m.group(4))


_GHOST_RE = re.compile(r"e(\d+)_(\d+)(\*?)")


def _parse_name(name, coord, momentum):
    m = _GHOST_RE.fullmatch(name)
    if m:
        return (ANTI if m.group(3) else GHOST, int(m.group(1)), int(m.group(2)))
    for kind, prefix in ((X, coord), (Y, momentum)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            return (kind, 0, int(name[len(prefix):]))
    return None


# ---------------------------------------------------------------------------
# monomials


def normalize(factors):
    """Sort a sequence of generators into canonical order.

    Returns ``(sign, monomial)``; the sign is 0 when an odd generator repeats.
    """
    odd = [g for g in factors if gen_odd(g)]
    sign = 1
    # Koszul sign of sorting the odd factors (bubble count)
    for i in range(len(odd)):
        for k in range(i + 1, len(odd)):
            if odd[i] > odd[k]:
                sign = -sign
            elif odd[i] == odd[k]:
                return 0, None
    exps = {}
    for g in factors:
        exps[g] = exps.get(g, 0) + 1
    return sign, tuple(sorted(exps.items()))


def mono_factors(m):
    """Expand a monomial into its canonical factor list."""
    out = []
    for g, e in m:
        out.extend([g] * e)
    return out


@lru_cache(maxsize=None)
def _odd_gens(m):
    return tuple(g for g, _ in m if gen_odd(g))


@lru_cache(maxsize=1 << 20)
def mono_mul(a, b):
    """Product of two monomials as ``(sign, monomial)``; sign 0 means zero."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    oa = _odd_gens(a)
    sign = 1
    if oa:
        ob = _odd_gens(b)
        if ob:
            n = len(oa)
            inversions = 0
            for g in ob:
                pos = bisect_right(oa, g)
                if pos and oa[pos - 1] == g:
                    return 0, None
                inversions += n - pos
            if inversions & 1:
                sign = -1
    exps = dict(a)
    for g, e in b:
        exps[g] = exps.get(g, 0) + e
    return sign, tuple(sorted(exps.items()))


@lru_cache(maxsize=None)
def mono_degree(m):
    return sum(gen_degree(g) * e for g, e in m)


@lru_cache(maxsize=None)
def mono_weight(m):
    """Filtration weight: total degree of the antighost factors."""
    return sum(g[1] * e for g, e in m if g[0] == ANTI)


@lru_cache(maxsize=None)
def mono_form(m):
    """Number of ghost and antighost factors, with multiplicity."""
    return sum(e for g, e in m if g[0] >= GHOST)


@lru_cache(maxsize=None)
def mono_poscount(m):
    """Number of positive-degree factors (membership in the powers of I)."""
    return sum(e for g, e in m if g[0] == ANTI)


@lru_cache(maxsize=None)
def mono_pdeg(m):
    """Polynomial degree in the symplectic variables."""
    return sum(e for g, e in m if g[0] <= Y)


@lru_cache(maxsize=None)
def mono_split(m):
    """Split ``m`` as ``t * b`` with ``t`` free of antighosts and ``b`` antighosts only.

    Canonical order puts antighosts last, so no sign arises.
    """
    k = len(m)
    while k and m[k - 1][0][0] == ANTI:
        k -= 1
    return m[:k], m[k:]


@lru_cache(maxsize=None)
def mono_ppart(m):
    """Split ``m`` as ``p * rest`` with ``p`` the symplectic part."""
    k = 0
    while k < len(m) and m[k][0][0] <= Y:
        k += 1
    return m[:k], m[k:]


def mono_str(m, table):
    if not m:
        return "1"
    parts = []
    for g, e in m:
        parts.append(table.name(g) if e == 1 else f"{table.name(g)}^{e}")
    return " ".join(parts)


def left_derivative(m, g):
    """``(coeff, rest)`` with ``m = coeff * g * rest`` (``g`` moved to the front)."""
    before_odd = 0
    for idx, (h, e) in enumerate(m):
        if h == g:
            rest = m[:idx] + (((h, e - 1),) if e > 1 else ()) + m[idx + 1:]
            if gen_odd(g):
                return (-1 if before_odd & 1 else 1), rest
            return e, rest
        if gen_odd(h):
            before_odd += 1
    return 0, None


def right_derivative(m, g):
    """``(coeff, rest)`` with ``m = coeff * rest * g`` (``g`` moved to the back)."""
    after_odd = 0
    for idx in range(len(m) - 1, -1, -1):
        h, e = m[idx]
        if h == g:
            rest = m[:idx] + (((h, e - 1),) if e > 1 else ()) + m[idx + 1:]
            if gen_odd(g):
                return (-1 if after_odd & 1 else 1), rest
            return e, rest
        if gen_odd(h):
            after_odd += 1
    return 0, None


# ---------------------------------------------------------------------------
# elements


def _join_tables(a, b):
    if a == b:
        return a
    if a.issubtable(b):
        return b
    if b.issubtable(a):
        return a
    raise TableMismatch(f"incompatible generator tables: {a.header()} vs {b.header()}")


def _join_N(a, b):
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise TruncationMismatch(f"truncation orders differ: {a} vs {b}")


def as_fraction(c):
    return c if isinstance(c, Fraction) else Fraction(c)


class Element:
    """A finite sum of monomials with rational coefficients, modulo ``F^N``.

    ``N=None`` means no truncation.  Elements are treated as immutable.
    """

    __slots__ = ("terms", "table", "N")

    def __init__(self, terms, table, N=None):
        if N is not None and N < 0:
            raise ValueError("truncation order must be non-negative")
        clean = {}
        for m, c in terms.items():
            if c and (N is None or mono_weight(m) < N):
                clean[m] = as_fraction(c)
        self.terms = clean
        self.table = table
        self.N = N

    @classmethod
    def _raw(cls, terms, table, N):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.table = table
        obj.N = N
        return obj

    # constructors
    @classmethod
    def zero(cls, table, N=None):
        return cls._raw({}, table, N)

    @classmethod
    def one(cls, table, N=None):
        return cls({ONE: Fraction(1)}, table, N)

    @classmethod
    def scalar(cls, c, table, N=None):
        return cls({ONE: c}, table, N)

    @classmethod
    def gen(cls, table, g, N=None):
        if isinstance(g, str):
            g = table.gen(g)
        elif g not in table:
            raise KeyError(f"generator {g} not in table")
        return cls({((g, 1),): Fraction(1)}, table, N)

    @classmethod
    def monomial(cls, table, factors, coeff=1, N=None):
        gens = [table.gen(f) if isinstance(f, str) else f for f in factors]
        for g in gens:
            if g not in table:
                raise KeyError(f"generator {g} not in table")
        sign, m = normalize(gens)
        if sign == 0:
            return cls.zero(table, N)
        return cls({m: sign * as_fraction(coeff)}, table, N)

    # basic protocol
    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Element.scalar(other, self.table, self.N)
        if not isinstance(other, Element):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"Element({self.to_expr()!r}, N={self.N})"

    def __str__(self):
        return self.to_expr()

    def coeff(self, m):
        return self.terms.get(m, Fraction(0))

    def with_table(self, table):
        if not self.table.issubtable(table):
            raise TableMismatch("target table does not contain this element's generators")
        return Element._raw(dict(self.terms), table, self.N)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Element):
            return other
        if isinstance(other, (int, Fraction)):
            return Element.scalar(other, self.table, self.N)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        table = _join_tables(self.table, other.table)
        N = _join_N(self.N, other.N)
        out = dict(self.terms)
        for m, c in other.terms.items():
            if N is not None and mono_weight(m) >= N:
                continue
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        if N is not None and self.N is None:
            out = {m: c for m, c in out.items() if mono_weight(m) < N}
        return Element._raw(out, table, N)

    __radd__ = __add__

    def __neg__(self):
        return Element._raw({m: -c for m, c in self.terms.items()}, self.table, self.N)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = as_fraction(c)
        if not c:
            return Element.zero(self.table, self.N)
        return Element._raw({m: c * v for m, v in self.terms.items()}, self.table, self.N)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Element):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, c):
        return self.scale(Fraction(1) / as_fraction(c))

    # gradings
    def degrees(self):
        return sorted({mono_degree(m) for m in self.terms})

    def degree(self):
        """The degree of a homogeneous nonzero element (None for zero)."""
        ds = self.degrees()
        if not ds:
            return None
        if len(ds) > 1:
            raise ValueError(f"element is not homogeneous (degrees {ds})")
        return ds[0]

    def min_weight(self):
        return min((mono_weight(m) for m in self.terms), default=None)

    def min_poscount(self):
        return min((mono_poscount(m) for m in self.terms), default=None)

    def max_pdeg(self):
        return max((mono_pdeg(m) for m in self.terms), default=0)

    def filter(self, pred):
        return Element._raw({m: c for m, c in self.terms.items() if pred(m)}, self.table, self.N)

    def weight_part(self, p):
        return self.filter(lambda m: mono_weight(m) == p)

    def has_antighosts(self):
        return any(g[0] == ANTI for m in self.terms for g, _ in m)

    def has_ghosts(self):
        return any(g[0] == GHOST for m in self.terms for g, _ in m)

    # serialization
    def to_text(self):
        """One ``p/q * factors`` line per term, sorted by the monomial order."""
        lines = []
        for m in sorted(self.terms):
            c = self.terms[m]
            lines.append(f"{c.numerator}/{c.denominator} * {mono_str(m, self.table)}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_expr(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            c = self.terms[m]
            if m == ONE:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono_str(m, self.table))
            elif c == -1:
                parts.append("-" + mono_str(m, self.table))
            else:
                parts.append(f"{c}*{mono_str(m, self.table)}")
        return " + ".join(parts).replace("+ -", "- ")

    @classmethod
    def from_text(cls, text, table, N=None):
        terms = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if " * " not in line:
                raise ValueError(f"line {lineno}: expected 'p/q * factors', got {raw!r}")
            coef_text, _, body = line.partition(" * ")
            try:
                coef = Fraction(coef_text.strip())
            except ValueError:
                raise ValueError(f"line {lineno}, column 1: bad coefficient {coef_text!r}") from None
            factors = []
            for tok in body.split():
                if tok == "1":
                    continue
                name, _, power = tok.partition("^")
                try:
                    g = table.gen(name)
                except KeyError:
                    col = raw.find(tok) + 1
                    raise ValueError(f"line {lineno}, column {col}: unknown generator {name!r}") from None
                factors.extend([g] * (int(power) if power else 1))
            sign, m = normalize(factors)
            if sign:
                terms[m] = terms.get(m, 0) + sign * coef
        return cls(terms, table, N)


def mul(a, b):
    """Product in the graded-commutative algebra, truncated at the joint ``N``."""
    table = _join_tables(a.table, b.table)
    N = _join_N(a.N, b.N)
    out = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            sign, m = mono_mul(ma, mb)
            if not sign or (N is not None and mono_weight(m) >= N):
                continue
            v = out.get(m, 0) + (ca * cb if sign > 0 else -ca * cb)
            if v:
                out[m] = v
            else:
                del out[m]
    return Element._raw(out, table, N)


def truncate(a, N):
    """Image of ``a`` in ``X / F^N``; ``N`` may not exceed the current order."""
    if N < 0:
        raise ValueError("truncation order must be non-negative")
    if a.N is not None and N > a.N:
        raise TruncationMismatch(f"cannot raise truncation order from {a.N} to {N}")
    return Element._raw({m: c for m, c in a.terms.items() if mono_weight(m) < N}, a.table, N)


def degree_decompose(a, form=False):
    """Split ``a`` into homogeneous components by degree (or by form degree)."""
    key = mono_form if form else mono_degree
    parts = {}
    for m, c in a.terms.items():
        parts.setdefault(key(m), {})[m] = c
    return {d: Element._raw(t, a.table, a.N) for d, t in sorted(parts.items())}


def rename(a, mapping, table):
    """Apply a generator substitution ``g -> mapping[g]`` (identity if absent)."""
    out = {}
    for m, c in a.terms.items():
        factors = [mapping.get(g, g) for g in mono_factors(m)]
        sign, nm = normalize(factors)
        if sign:
            v = out.get(nm, 0) + sign * c
            if v:
                out[nm] = v
            else:
                del out[nm]
    return Element._raw(out, table, a.N)


def words_of_degree(gens, total):
    """All monomials in ``gens`` (all of nonzero degree of one sign) with degree ``total``."""
    gens = sorted(gens)
    out = []

    def rec(idx, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for k in range(idx, len(gens)):
            g = gens[k]
            step = abs(gen_degree(g))
            if step > remaining:
                continue
            maxe = 1 if gen_odd(g) else remaining // step
            for e in range(1, maxe + 1):
                acc.append((g, e))
                rec(k + 1, remaining - e * step, acc)
                acc.pop()

    if total >= 0:
        rec(0, total, [])
    return sorted(out)


@lru_cache(maxsize=None)
def p_monomials(n_pairs, k):
    """Monomials of degree ``k`` in the symplectic variables."""
    from itertools import combinations_with_replacement

    gens = [(X, 0, i) for i in range(1, n_pairs + 1)] + [(Y, 0, i) for i in range(1, n_pairs + 1)]
    if k == 0:
        return ((),)
    out = []
    for combo in combinations_with_replacement(gens, k):
        exps = {}
        for g in combo:
            exps[g] = exps.get(g, 0) + 1
        out.append(tuple(sorted(exps.items())))
    return tuple(sorted(out))


def x_slice(table, k, N, D):
    """Monomials of degree ``k``, filtration weight below ``N`` and polynomial degree <= ``D``."""
    out = []
    ghosts, antis = table.ghosts(), table.antighosts()
    for w in range(0, N):
        for b in words_of_degree(antis, w):
            for t in words_of_degree(ghosts, w - k):
                for d in range(0, D + 1):
                    for p in p_monomials(table.n_pairs, d):
                        out.append(p + t + b)
    return out

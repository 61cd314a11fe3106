"""Quantization: normal-ordered words, the map q, quantum products and the quantum master equation.

Coordinates ``x_i`` and ghosts form the left block, momenta ``y_i`` and
antighosts the right block.  Inside a block the algebra is graded
commutative; across blocks ``[u, v] = uv - (-1)^{|u||v|} vu = hbar`` for a
left generator ``u`` and its dual ``v``.  A normal-ordered monomial is stored
as ``(left, right)``, each a canonically sorted classical monomial.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .algebra import (
    ANTI, GHOST, X, Element, GeneratorTable, _join_tables, dual, gen_odd,
    mono_degree, mono_factors, mono_mul, mono_str, mono_weight, normalize,
)
from .brst import InvariantViolation, MasterEquationError, cme_check
from .cohomology import SliceBoundsError, probe_exact
from .poisson import bracket


class Obstruction(RuntimeError):
    """The quantum master equation cannot be continued: a class in degree 2 survives."""

    def __init__(self, order, witness):
        super().__init__(f"obstruction at order hbar^{order}")
        self.order = order
        self.witness = witness


def is_left(g):
    return g[0] == X or g[0] == GHOST


def qkey(g):
    return (0 if is_left(g) else 1, g[1], g[2])


def _finish(word):
    """Convert a normal-ordered word into ``(left, right)`` monomials."""
    left = [g for g in word if is_left(g)]
    right = [g for g in word if not is_left(g)]
    _, lm = normalize(left)
    _, rm = normalize(right)
    return (lm, rm)


def _out_of_order(word):
    out = []
    for i in range(len(word) - 1):
        a, b = word[i], word[i + 1]
        ka, kb = qkey(a), qkey(b)
        if ka > kb or (a == b and gen_odd(a)):
            out.append(i)
    return out


def _rewrite(word, i):
    """One rewrite at adjacency ``i``: returns a list of (coefficient, hbar power, word)."""
    a, b = word[i], word[i + 1]
    if a == b:
        return []  # odd square
    sign = -1 if gen_odd(a) and gen_odd(b) else 1
    swapped = word[:i] + (b, a) + word[i + 2:]
    out = [(sign, 0, swapped)]
    if not is_left(a) and is_left(b) and dual(a) == b:
        out.append((-sign, 1, word[:i] + word[i + 2:]))
    return out


def _add(acc, key, c):
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


@lru_cache(maxsize=1 << 18)
def _normal_leftmost(word, K):
    pos = _out_of_order(word)
    if not pos:
        return ((_finish(word), 0, 1),)
    acc = {}
    for c, h, w in _rewrite(word, pos[0]):
        if K is not None and h >= K:
            continue
        for mono, h2, c2 in _normal_leftmost(w, None if K is None else K - h):
            _add(acc, (mono, h + h2), c * c2)
    return tuple((m, h, c) for (m, h), c in acc.items())


def _normal_random(word, K, rng):
    pos = _out_of_order(word)
    if not pos:
        return {(_finish(word), 0): 1}
    acc = {}
    for c, h, w in _rewrite(word, rng.choice(pos)):
        if K is not None and h >= K:
            continue
        for (mono, h2), c2 in _normal_random(w, None if K is None else K - h, rng).items():
            _add(acc, (mono, h + h2), c * c2)
    return acc


def normal_order(word, table, K=None, N=None, rng=None):
    """Normal form of a product of generators, as a :class:`QElement`.

    ``rng`` selects a random rewrite position at each step instead of the
    leftmost one; by confluence the result does not depend on it.
    """
    word = tuple(table.gen(g) if isinstance(g, str) else g for g in word)
    if rng is None:
        items = {(m, h): Fraction(c) for m, h, c in _normal_leftmost(word, K)}
    else:
        items = {k: Fraction(c) for k, c in _normal_random(word, K, rng).items()}
    return QElement(items, table, N, K)


def qmono_weight(qm):
    return mono_weight(qm[1])


def qmono_degree(qm):
    return mono_degree(qm[0]) + mono_degree(qm[1])


def qmono_str(qm, table):
    left, right = qm
    if not left and not right:
        return "1"
    parts = [mono_str(left, table)] if left else []
    if right:
        parts.append(mono_str(right, table))
    return " ".join(parts)


class QElement:
    """Sum of ``coeff * hbar^k * left * right`` modulo ``hbar^K`` and ``F^N``."""

    __slots__ = ("terms", "table", "N", "K")

    def __init__(self, terms, table, N=None, K=None):
        self.terms = {
            (m, h): Fraction(c) for (m, h), c in terms.items()
            if c and (K is None or h < K) and (N is None or qmono_weight(m) < N)
        }
        self.table = table
        self.N = N
        self.K = K

    def _like(self, terms, N=None, K=None):
        return QElement(terms, self.table, self.N if N is None else N, self.K if K is None else K)

    @classmethod
    def zero(cls, table, N=None, K=None):
        return cls({}, table, N, K)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, QElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"QElement({self.to_expr()!r}, N={self.N}, K={self.K})"

    def _joint(self, other):
        table = _join_tables(self.table, other.table)
        N = min([n for n in (self.N, other.N) if n is not None], default=None)
        K = min([k for k in (self.K, other.K) if k is not None], default=None)
        if self.N is not None and other.N is not None and self.N != other.N:
            raise ValueError("truncation orders differ")
        if self.K is not None and other.K is not None and self.K != other.K:
            raise ValueError("hbar orders differ")
        return table, N, K

    def __add__(self, other):
        table, N, K = self._joint(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            _add(out, k, c)
        return QElement(out, table, N, K)

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        return self._like({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return qmul(self, other)

    def __rmul__(self, c):
        return self.scale(c)

    def hbar_shift(self, k):
        """Multiply by ``hbar^k`` (k may be negative when divisible)."""
        out = {}
        for (m, h), c in self.terms.items():
            if h + k < 0:
                raise InvariantViolation("division by hbar is not exact")
            out[(m, h + k)] = c
        return self._like(out)

    def hbar_part(self, k):
        """Coefficient of ``hbar^k`` as a classical element (through the inverse of q)."""
        return q_inv(QElement({(m, 0): c for (m, h), c in self.terms.items() if h == k},
                              self.table, self.N, None))

    def min_hbar(self):
        return min((h for _, h in self.terms), default=None)

    def degrees(self):
        return sorted({qmono_degree(m) for m, _ in self.terms})

    def degree_parts(self):
        parts = {}
        for (m, h), c in self.terms.items():
            parts.setdefault(qmono_degree(m), {})[(m, h)] = c
        return {d: self._like(t) for d, t in parts.items()}

    def with_K(self, K):
        return QElement(self.terms, self.table, self.N, K)

    def to_text(self):
        lines = []
        for (m, h) in sorted(self.terms):
            c = self.terms[(m, h)]
            lines.append(f"h^{h} | {c.numerator}/{c.denominator} * {qmono_str(m, self.table)}")
        return "\n".join(lines) + ("\n" if lines else "")

    def to_expr(self):
        if not self.terms:
            return "0"
        parts = []
        for (m, h) in sorted(self.terms, key=lambda k: (k[1], k[0])):
            c = self.terms[(m, h)]
            hb = "" if h == 0 else ("hbar" if h == 1 else f"hbar^{h}")
            body = " ".join(x for x in (hb, qmono_str(m, self.table) if m != ((), ()) else "") if x)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    @classmethod
    def from_text(cls, text, table, N=None, K=None):
        terms = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            hpart, _, rest = line.partition(" | ")
            h = int(hpart[2:])
            coef, _, body = rest.partition(" * ")
            word = []
            for tok in body.split():
                if tok == "1":
                    continue
                name, _, p = tok.partition("^")
                word += [table.gen(name)] * (int(p) if p else 1)
            q = normal_order(word, table)
            for (m, h2), c in q.terms.items():
                _add(terms, (m, h + h2), c * Fraction(coef))
        return cls(terms, table, N, K)


# ---------------------------------------------------------------------------


def q_map(a, K=None):
    """The vector space isomorphism ``q``: reorder each monomial into (left, right) blocks."""
    out = {}
    for m, c in a.terms.items():
        factors = mono_factors(m)
        left = [g for g in factors if is_left(g)]
        right = [g for g in factors if not is_left(g)]
        # Koszul sign of moving the right-block factors past later left-block ones
        sign = 1
        odd_right_seen = 0
        for g in factors:
            if not gen_odd(g):
                continue
            if is_left(g):
                if odd_right_seen & 1:
                    sign = -sign
            else:
                odd_right_seen += 1
        _, lm = normalize(left)
        _, rm = normalize(right)
        _add(out, ((lm, rm), 0), sign * c)
    return QElement(out, a.table, a.N, K)


def q_inv(A):
    """Inverse of ``q``; the input must be free of hbar (reduce it with ``with_K(1)`` first)."""
    out = {}
    for ((lm, rm), h), c in A.terms.items():
        if h:
            raise ValueError("q_inv is only defined on hbar-free elements")
        sign, m = mono_mul(lm, rm)
        # q put left factors first; undo with the same Koszul sign as mul
        _add(out, m, sign * c)
    return Element(out, A.table, A.N)


@lru_cache(maxsize=1 << 18)
def _middle(right, left, K):
    """Normal order ``right * left`` (a right-block monomial times a left-block one)."""
    return _normal_leftmost(tuple(mono_factors(right)) + tuple(mono_factors(left)), K)


def qmul(a, b):
    """Product of quantum elements modulo ``hbar^K`` and ``F^N``."""
    table, N, K = a._joint(b)
    out = {}
    for ((al, ar), ha), ca in a.terms.items():
        for ((bl, br), hb), cb in b.terms.items():
            h0 = ha + hb
            if K is not None and h0 >= K:
                continue
            for (ml, mr), h1, c1 in _middle(ar, bl, None if K is None else K - h0):
                s1, left = mono_mul(al, ml)
                if not s1:
                    continue
                s2, right = mono_mul(mr, br)
                if not s2:
                    continue
                if N is not None and mono_weight(right) >= N:
                    continue
                _add(out, ((left, right), h0 + h1), s1 * s2 * c1 * ca * cb)
    return QElement(out, table, N, K)


def qbracket_over_hbar(a, b):
    """``(ab - (-1)^{|a||b|} ba) / hbar``, exact modulo ``hbar^K``."""
    table, N, K = a._joint(b)
    Kp = None if K is None else K + 1
    total = QElement.zero(table, N, Kp)
    for da, pa in a.degree_parts().items():
        for db, pb in b.degree_parts().items():
            pa1, pb1 = pa.with_K(Kp), pb.with_K(Kp)
            comm = qmul(pa1, pb1)
            other = qmul(pb1, pa1)
            comm = comm - other if (da * db) % 2 == 0 else comm + other
            total = total + comm
    if any(h == 0 for _, h in total.terms):
        raise InvariantViolation("commutator not divisible by hbar")
    return total.hbar_shift(-1).with_K(K)


def qexp_ad(c, x):
    """``exp((1/hbar) ad_c)`` applied to ``x``; ``c`` must be divisible by hbar."""
    if c and c.min_hbar() < 1:
        raise ValueError("quantum gauge generator must be divisible by hbar")
    total, term, k = x, x, 0
    while term:
        k += 1
        if x.K is not None and k > x.K + 1:
            raise InvariantViolation("quantum exponential did not terminate")
        term = qbracket_over_hbar(c, term).scale(Fraction(1, k))
        total = total + term
    return total


# ---------------------------------------------------------------------------


@dataclass
class QMEResult:
    r: QElement
    corrections: list  # classical u_n with r = q(R) + sum hbar^n q(u_n)
    N: int
    K: int

    def dumps(self):
        lines = ["# quantum charge", "table " + self.r.table.header(), f"N {self.N}", f"K {self.K}"]
        lines.append(f"corrections {sum(1 for u in self.corrections if u)}")
        lines.append("terms")
        lines += ["  " + ln for ln in self.r.to_text().splitlines()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text, table=None):
        lines = text.splitlines()
        t = GeneratorTable.from_header(lines[1][len("table "):])
        table = table or t
        N = int(lines[2].split()[1])
        K = int(lines[3].split()[1])
        idx = lines.index("terms")
        r = QElement.from_text("\n".join(ln.strip() for ln in lines[idx + 1:]), table, N, K)
        return cls(r, [], N, K)


def qme_residual(r):
    return qbracket_over_hbar(r, r)


def qme_solve(R, N, K, D=3):
    """Solve ``[r, r] = 0`` modulo ``(hbar^K, F^N)`` with ``r = q(R) + O(hbar)``."""
    if cme_check(R, N):
        raise MasterEquationError("classical charge does not solve the master equation")
    Rt = Element(R.terms, R.table, N)
    r = q_map(Rt, K)
    corrections = []
    for n in range(0, K - 1):
        w_full = qme_residual(r)
        for k in range(0, n + 1):
            if w_full.hbar_part(k):
                raise InvariantViolation(f"residual not divisible by hbar^{n + 1}")
        w = w_full.hbar_part(n + 1)
        if not w:
            corrections.append(Element.zero(R.table, N))
            continue
        if bracket(Rt, Element(w.terms, w.table, N)):
            raise InvariantViolation(f"order {n + 1} residual is not closed")
        probe = probe_exact(w.scale(Fraction(-1, 2)), Rt, N, D, check=False)
        if probe.status == "insufficient":
            raise SliceBoundsError(f"order hbar^{n + 1}: {probe.detail}")
        if probe.status != "exact":
            raise Obstruction(n + 1, w)
        u = probe.primitive
        corrections.append(u)
        r = r + q_map(u, K).hbar_shift(n + 1)
    if qme_residual(r):
        raise InvariantViolation("quantum master equation residual is nonzero")
    return QMEResult(r, corrections, N, K)


@dataclass
class QuantumEquivalence:
    generators: list
    N: int
    K: int

    def apply(self, x):
        for c in self.generators:
            x = qexp_ad(c, x)
        return x

    def dumps(self):
        lines = ["# quantum gauge equivalence", f"N {self.N}", f"K {self.K}",
                 f"generators {len(self.generators)}"]
        for i, c in enumerate(self.generators, 1):
            lines.append(f"generator {i}")
            lines += ["  " + ln for ln in c.to_text().splitlines()]
        return "\n".join(lines) + "\n"


def quantum_gauge_match(r, rp, R, N, K, D=3):
    """Generators ``c_n = hbar^{n+1} q(u_n)`` carrying ``r`` to ``rp``."""
    Rt = Element(R.terms, R.table, N)
    gens = []
    cur = r
    for n in range(0, K - 1):
        for _ in range(3):
            v = (cur - rp).hbar_part(n + 1)
            lower = [k for k in range(0, n + 1) if (cur - rp).hbar_part(k)]
            if lower:
                raise InvariantViolation(f"charges differ at order hbar^{lower[0]}")
            if not v:
                break
            probe = probe_exact(v, Rt, N, D, check=False)
            if probe.status == "insufficient":
                raise SliceBoundsError(f"order hbar^{n + 1}: {probe.detail}")
            if probe.status != "exact":
                raise Obstruction(n + 1, v)
            c = q_map(probe.primitive, K).hbar_shift(n + 1)
            gens.append(c)
            cur = qexp_ad(c, cur)
        if (cur - rp).hbar_part(n + 1):
            raise InvariantViolation(f"order hbar^{n + 1} did not close")
    if cur - rp:
        raise InvariantViolation("quantum charges not matched")
    return QuantumEquivalence(gens, N, K)


def change_of_basis(word_factors, table, mats):
    """Apply a block change of ghost basis to a word; ``mats[l]`` acts on degree ``-l`` ghosts.

    Antighosts transform by the inverse transpose, so the pairing is preserved.
    Returns a list of (coefficient, word).
    """
    from sympy import Matrix

    inv = {}
    for l, a in mats.items():
        b = Matrix(a).inv().T
        inv[l] = [[Fraction(int(b[i, j].p), int(b[i, j].q)) for j in range(b.cols)] for i in range(b.rows)]
    words = [(Fraction(1), ())]
    for g in word_factors:
        kind, l, j = g
        if kind == GHOST and l in mats:
            col = [(Fraction(mats[l][k][j - 1]), (GHOST, l, k + 1)) for k in range(len(mats[l]))]
        elif kind == ANTI and l in mats:
            col = [(inv[l][k][j - 1], (ANTI, l, k + 1)) for k in range(len(inv[l]))]
        else:
            col = [(Fraction(1), g)]
        words = [(c * c2, w + (h,)) for c, w in words for c2, h in col if c2]
    return words


def apply_basis_change(A, mats):
    """Apply the change of basis to each normal-ordered monomial of ``A`` and renormalize."""
    out = QElement.zero(A.table, A.N, A.K)
    for ((lm, rm), h), c in A.terms.items():
        for c2, w in change_of_basis(mono_factors(lm) + mono_factors(rm), A.table, mats):
            q = normal_order(w, A.table, None if A.K is None else A.K - h, A.N)
            out = out + q.hbar_shift(h).scale(c * c2)
    return out


__all__ = [
    "normal_order", "q_map", "q_inv", "qmul", "qbracket_over_hbar", "qexp_ad", "qme_solve",
    "quantum_gauge_match", "QElement", "QMEResult", "Obstruction", "apply_basis_change",
    "change_of_basis", "qme_residual",
]
